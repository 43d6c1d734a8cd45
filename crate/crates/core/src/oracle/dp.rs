use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::lattice::{LatticePmf, PRUNE_BELOW};

/// Truncation and memory limits for the forward DP.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DpOptions {
    /// Edge states with less mass than this are dropped into `leaked`.
    pub prune_below: f64,
    pub max_states: usize,
}

impl Default for DpOptions {
    fn default() -> Self {
        Self { prune_below: PRUNE_BELOW, max_states: 1 << 26 }
    }
}

/// Mass vector of a walk killed below `floor`, advanced one step at a time.
pub(crate) struct KilledWalk {
    taps: Vec<f64>,
    min_step: i64,
    floor: i64,
    lo: i64,
    buf: Vec<f64>,
    head: usize,
    len: usize,
    scratch: Vec<f64>,
    opts: DpOptions,
    pub leaked: f64,
}

impl KilledWalk {
    /// `init` need not respect the floor: time 0 is never killed.
    pub fn new(step: &LatticePmf, floor: i64, init: &[(i64, f64)], opts: DpOptions) -> Self {
        let lo = init.iter().map(|a| a.0).min().unwrap_or(floor);
        let hi = init.iter().map(|a| a.0).max().unwrap_or(floor);
        let mut buf = vec![0.0; (hi - lo) as usize + 1];
        for &(x, p) in init {
            buf[(x - lo) as usize] += p;
        }
        let len = buf.len();
        Self {
            taps: step.dense().to_vec(),
            min_step: step.min_value(),
            floor,
            lo,
            buf,
            head: 0,
            len,
            scratch: Vec::new(),
            opts,
            leaked: 0.0,
        }
    }

    /// Lowest live position and the live masses from there upward.
    pub fn live(&self) -> (i64, &[f64]) {
        (self.lo, &self.buf[self.head..self.head + self.len])
    }

    pub fn mass(&self) -> f64 {
        self.live().1.iter().sum()
    }

    /// One step; `on_kill(position, mass)` sees every killed landing site.
    /// Returns the total killed mass.
    pub fn step<F: FnMut(i64, f64)>(&mut self, mut on_kill: F) -> Result<f64, OracleError> {
        let span = self.taps.len();
        let out_len = self.len + span - 1;
        self.scratch.clear();
        self.scratch.resize(out_len, 0.0);
        let cur = &self.buf[self.head..self.head + self.len];
        for (j, &p) in self.taps.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (d, &c) in self.scratch[j..j + self.len].iter_mut().zip(cur) {
                *d += p * c;
            }
        }
        let new_lo = self.lo + self.min_step;
        let kill_end = (self.floor - new_lo).clamp(0, out_len as i64) as usize;
        let mut killed = 0.0;
        for (k, &m) in self.scratch[..kill_end].iter().enumerate() {
            if m != 0.0 {
                on_kill(new_lo + k as i64, m);
                killed += m;
            }
        }
        let mut s = kill_end;
        while s < out_len && self.scratch[s] < self.opts.prune_below {
            self.leaked += self.scratch[s];
            s += 1;
        }
        let mut e = out_len;
        while e > s && self.scratch[e - 1] < self.opts.prune_below {
            self.leaked += self.scratch[e - 1];
            e -= 1;
        }
        if e - s > self.opts.max_states {
            return Err(OracleError::ResourceLimit { states: e - s, cap: self.opts.max_states });
        }
        std::mem::swap(&mut self.buf, &mut self.scratch);
        self.head = s;
        self.len = e - s;
        self.lo = new_lo + s as i64;
        Ok(killed)
    }
}
