use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primitives::{decay_len, ScheduleParams};
use crate::radio::{default_round_cap, Fidelity};

/// Integer range of fine-clustering scales `j` (fine rate `β = 2^-j`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JRange {
    /// Integers in `[lo·log D, hi·log D]`.
    Fractions { lo: f64, hi: f64 },
    /// Integers in `[lo, hi]`.
    Fixed { lo: u32, hi: u32 },
    /// `[1, max(2, ⌈0.5·log D⌉)]`, usable at small diameters.
    Desk,
}

impl JRange {
    pub fn resolve(&self, diameter: usize) -> Vec<u32> {
        let ld = crate::log2_d(diameter);
        let (lo, hi) = match *self {
            JRange::Fractions { lo, hi } => ((lo * ld).ceil().max(0.0) as u32, (hi * ld).floor().max(-1.0) as i64),
            JRange::Fixed { lo, hi } => (lo, hi as i64),
            JRange::Desk => (1, (0.5 * ld).ceil().max(2.0) as i64),
        };
        if hi < lo as i64 {
            Vec::new()
        } else {
            (lo..=hi as u32).collect()
        }
    }
}

/// When a Compete run stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Stop as soon as every node holds the maximum (a global check only the simulator can make).
    Oracle,
    /// Always run the full round budget.
    FixedBudget,
}

/// Constants of the Compete protocol family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompeteConfig {
    /// Coarse rate is `D^-coarse_beta_exp`.
    pub coarse_beta_exp: f64,
    /// `⌈D^fine_count_exp⌉` fine clusterings per scale.
    pub fine_count_exp: f64,
    pub j_range: JRange,
    /// Sequence length `⌈D^seq_len_exp⌉`.
    pub seq_len_exp: f64,
    /// Background rate is `D^-background_beta_exp`.
    pub background_beta_exp: f64,
    /// `⌈D^background_count_exp⌉` background clusterings.
    pub background_count_exp: f64,
    /// Floor of `⌈background_count_log·log max(n, 64)/min(1, -log(1 - e^-β))⌉` background
    /// clusterings, where `1 - e^-β` bounds the chance that one clustering cuts a given edge.
    #[serde(default)]
    pub background_count_log: f64,
    /// Main radius `⌈c1·log n/(β·log D)⌉`.
    pub c1: f64,
    /// Background radius `⌈c_bg·log n/β⌉`.
    pub c_bg: f64,
    pub c_sched: f64,
    pub c_pre: f64,
    /// Charged partition cost `c_part·log³ n/β`.
    pub c_part: f64,
    /// Decay rounds per layer step in faithful precomputation, as a multiple of `⌈log n⌉`.
    pub decay_reps: f64,
    /// Decay rounds per tree layer in faithful propagation.
    pub icp_layer_reps: u32,
    pub mode: Fidelity,
    /// Round cap for the propagation phase; `None` uses the default cap.
    pub round_cap: Option<u64>,
    pub termination: Termination,
}

impl CompeteConfig {
    /// Constants exactly as stated for the asymptotic protocol.
    pub fn paper() -> Self {
        CompeteConfig {
            coarse_beta_exp: 0.5,
            fine_count_exp: 0.2,
            j_range: JRange::Fractions { lo: 0.01, hi: 0.1 },
            seq_len_exp: 0.99,
            background_beta_exp: 0.1,
            background_count_exp: 0.2,
            background_count_log: 0.0,
            c1: 1.0,
            c_bg: 1.0,
            c_sched: 1.0,
            c_pre: 1.0,
            c_part: 1.0,
            decay_reps: 1.0,
            icp_layer_reps: 2,
            mode: Fidelity::Charged,
            round_cap: None,
            termination: Termination::Oracle,
        }
    }

    /// Paper exponents with the desk j-range, so that runs at diameters in
    /// the hundreds have at least two fine scales, and at least `2·log n`
    /// background clusterings, so that an edge cut by all of them is rare.
    /// `c1 = 2` minimised charged propagation rounds on paths up to 4096.
    pub fn desk() -> Self {
        CompeteConfig {
            j_range: JRange::Desk,
            background_count_log: 2.0,
            c1: 2.0,
            ..CompeteConfig::paper()
        }
    }

    pub fn with_mode(mut self, mode: Fidelity) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let exps = [
            ("coarse_beta_exp", self.coarse_beta_exp),
            ("fine_count_exp", self.fine_count_exp),
            ("seq_len_exp", self.seq_len_exp),
            ("background_beta_exp", self.background_beta_exp),
            ("background_count_exp", self.background_count_exp),
        ];
        for (name, e) in exps {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0,1), got {e}")));
            }
        }
        if let JRange::Fractions { lo, hi } = self.j_range {
            if !(lo >= 0.0 && lo < hi) {
                return Err(Error::Config(format!(
                    "j fractions must satisfy 0 <= lo < hi, got [{lo},{hi}]"
                )));
            }
        }
        let consts = [
            ("c1", self.c1),
            ("c_bg", self.c_bg),
            ("c_sched", self.c_sched),
            ("c_pre", self.c_pre),
            ("c_part", self.c_part),
            ("decay_reps", self.decay_reps),
        ];
        for (name, c) in consts {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {c}")));
            }
        }
        if !(self.background_count_log >= 0.0 && self.background_count_log.is_finite()) {
            return Err(Error::Config(format!(
                "background_count_log must be non-negative, got {}",
                self.background_count_log
            )));
        }
        if self.icp_layer_reps == 0 {
            return Err(Error::Config("icp_layer_reps must be at least 1".into()));
        }
        if self.round_cap == Some(0) {
            return Err(Error::Config("round_cap must be at least 1".into()));
        }
        Ok(())
    }

    pub fn schedule_params(&self) -> ScheduleParams {
        ScheduleParams {
            c_sched: self.c_sched,
            c_pre: self.c_pre,
            decay_reps: self.decay_reps,
        }
    }

    /// Resolves every size-dependent quantity for a network with `n` nodes
    /// and diameter `d`. Fails on an empty j-range.
    pub fn derive(&self, n: usize, d: usize) -> Result<Derived> {
        self.validate()?;
        let js = self.j_range.resolve(d);
        if js.is_empty() {
            return Err(Error::Config(format!(
                "j-range {:?} contains no integer at diameter {d}",
                self.j_range
            )));
        }
        let dd = d.max(1) as f64;
        let log_n = crate::log2_n(n);
        let log_d = crate::log2_d(d);
        let beta_bg = dd.powf(-self.background_beta_exp);
        Ok(Derived {
            n,
            d,
            log_n,
            log_d,
            beta_coarse: dd.powf(-self.coarse_beta_exp),
            js,
            copies: dd.powf(self.fine_count_exp).ceil().max(1.0) as usize,
            seq_len: dd.powf(self.seq_len_exp).ceil().max(1.0) as usize,
            beta_bg,
            bg_count: dd
                .powf(self.background_count_exp)
                .max(background_floor(self.background_count_log, n, beta_bg))
                .ceil()
                .max(1.0) as usize,
            ell_bg: ((self.c_bg * log_n / beta_bg).ceil() as u32).max(1),
            c1: self.c1,
            steps: decay_len(n),
            cap: self.round_cap.unwrap_or_else(|| default_round_cap(n, d)),
        })
    }
}

fn background_floor(c: f64, n: usize, beta: f64) -> f64 {
    let cut = -(-beta).exp_m1();
    c * crate::log2_n(n.max(64)) / (-cut.log2()).min(1.0)
}

impl Default for CompeteConfig {
    fn default() -> Self {
        CompeteConfig::desk()
    }
}

/// Size-dependent protocol quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct Derived {
    pub n: usize,
    pub d: usize,
    pub log_n: f64,
    pub log_d: f64,
    pub beta_coarse: f64,
    pub js: Vec<u32>,
    pub copies: usize,
    pub seq_len: usize,
    pub beta_bg: f64,
    pub bg_count: usize,
    pub ell_bg: u32,
    c1: f64,
    pub steps: u32,
    pub cap: u64,
}

impl Derived {
    /// Main-lane ICP radius for fine rate `2^-j`.
    pub fn ell_main(&self, j: u32) -> u32 {
        let beta = 0.5f64.powi(j as i32);
        ((self.c1 * self.log_n / (beta * self.log_d)).ceil() as u32).max(1)
    }
}
