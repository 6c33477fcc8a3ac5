//! Model inputs, decision variables and evaluated metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldError, Result};

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Physical and network parameters. Distances are in km, intensities in
/// points/km², bandwidth in Hz and rates in bit/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub n_files: usize,
    pub zipf_skew: f64,
    pub cache_capacity: usize,
    pub stream_rate: f64,
    pub harmonic_depth: usize,
    pub lambda_hn: f64,
    pub lambda_bs: f64,
    pub lambda_ue: f64,
    /// Helper-node transmit power.
    pub tx_power_dbm: f64,
    /// Base-station transmit power; only enters the simulator's noise term.
    pub bs_tx_power_dbm: f64,
    pub noise_density_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub ue_gain_dbi: f64,
    pub hn_gain_dbi: f64,
    pub pathloss_exponent: f64,
    /// Path loss at the 1 km reference distance.
    pub pathloss_intercept_db: f64,
    pub n_antennas: usize,
    pub sinr_threshold: f64,
    pub interference_limited: bool,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario::reference()
    }
}

impl Scenario {
    /// Reference deployment: 100 files with Zipf skew 0.6, 10-file helper
    /// caches, 1 Mbit/s streams, harmonic depth 226 (H ≈ 6), sparse helpers
    /// (50/km²), 200 BS/km², 2·10⁵ UE/km², 23 dBm, 8 dBi helper gain, 9 dB
    /// noise figure, e = 3.76, eight antennas and γ_th = 0.1.
    pub fn reference() -> Self {
        Scenario {
            n_files: 100,
            zipf_skew: 0.6,
            cache_capacity: 10,
            stream_rate: 1e6,
            harmonic_depth: 226,
            lambda_hn: 50.0,
            lambda_bs: 200.0,
            lambda_ue: 2e5,
            tx_power_dbm: 23.0,
            bs_tx_power_dbm: 23.0,
            noise_density_dbm_hz: -174.0,
            noise_figure_db: 9.0,
            ue_gain_dbi: 0.0,
            hn_gain_dbi: 8.0,
            pathloss_exponent: 3.76,
            pathloss_intercept_db: 98.5,
            n_antennas: 8,
            sinr_threshold: 0.1,
            interference_limited: true,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(s)?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_json_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Every violated invariant, attributed to its field.
    pub fn violations(&self) -> Vec<FieldError> {
        let mut out = Vec::new();
        let mut push = |field: &'static str, message: &str| {
            out.push(FieldError {
                field,
                message: message.to_string(),
            })
        };

        if self.n_files == 0 {
            push("n_files", "n_files must be at least 1");
        }
        if !(self.zipf_skew >= 0.0) || !self.zipf_skew.is_finite() {
            push("zipf_skew", "zipf_skew must be finite and non-negative");
        }
        if self.cache_capacity == 0 {
            push("cache_capacity", "cache_capacity must be at least 1");
        }
        if self.cache_capacity > self.n_files {
            push("cache_capacity", "cache_capacity exceeds library");
        }
        if !(self.stream_rate > 0.0) || !self.stream_rate.is_finite() {
            push("stream_rate", "stream_rate must be positive");
        }
        if self.harmonic_depth == 0 {
            push("harmonic_depth", "harmonic_depth must be at least 1");
        }
        for (field, v) in [
            ("lambda_hn", self.lambda_hn),
            ("lambda_bs", self.lambda_bs),
            ("lambda_ue", self.lambda_ue),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                push(field, "intensity must be strictly positive");
            }
        }
        for (field, v) in [
            ("tx_power_dbm", self.tx_power_dbm),
            ("bs_tx_power_dbm", self.bs_tx_power_dbm),
            ("noise_density_dbm_hz", self.noise_density_dbm_hz),
            ("noise_figure_db", self.noise_figure_db),
            ("ue_gain_dbi", self.ue_gain_dbi),
            ("hn_gain_dbi", self.hn_gain_dbi),
            ("pathloss_intercept_db", self.pathloss_intercept_db),
        ] {
            if !v.is_finite() {
                push(field, "value must be finite");
            }
        }
        if !(self.pathloss_exponent > 2.0) || !self.pathloss_exponent.is_finite() {
            push("pathloss_exponent", "pathloss_exponent must exceed 2");
        }
        if self.n_antennas == 0 {
            push("n_antennas", "n_antennas must be at least 1");
        }
        if !(self.sinr_threshold > 0.0) || !self.sinr_threshold.is_finite() {
            push("sinr_threshold", "sinr_threshold must be positive");
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(v))
        }
    }

    /// `p_tx G_hn G_ue / (N₀ NF K)`: received SNR per Hz at 1 km before
    /// fading, the scalar multiplying every `‖x‖^{-e}` term.
    pub fn effective_tx_snr_density(&self) -> f64 {
        db_to_linear(
            self.tx_power_dbm + self.hn_gain_dbi + self.ue_gain_dbi
                - self.noise_density_dbm_hz
                - self.noise_figure_db
                - self.pathloss_intercept_db,
        )
    }

    /// Same as [`Self::effective_tx_snr_density`] for the base-station tier
    /// (BS antennas are folded into the beamforming gains).
    pub fn bs_snr_density(&self) -> f64 {
        db_to_linear(
            self.bs_tx_power_dbm + self.ue_gain_dbi
                - self.noise_density_dbm_hz
                - self.noise_figure_db
                - self.pathloss_intercept_db,
        )
    }

    /// `H_w = Σ_{i=1}^{D} 1/i`
    pub fn harmonic_factor(&self) -> f64 {
        crate::multicast::harmonic_factor(self.harmonic_depth)
    }

    /// γ_R: transmit SNR scale normalised by the harmonic-broadcast rate.
    pub fn gamma_r(&self) -> f64 {
        self.effective_tx_snr_density() / (self.stream_rate * self.harmonic_factor())
    }

    /// `w_th = R / log₂(1 + γ_th)`
    pub fn bandwidth_threshold(&self) -> f64 {
        self.stream_rate / (1.0 + self.sinr_threshold).log2()
    }

    pub fn delta(&self) -> f64 {
        2.0 / self.pathloss_exponent
    }
}

/// Decision variables: cache weights `p`, inverse spectral efficiencies
/// `β_n = 1/α_n = w_n^MC / R`, and the number `u` of users multiplexed per
/// unicast resource.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Policy {
    #[serde(rename = "p")]
    pub cache_weights: Vec<f64>,
    pub beta: Vec<f64>,
    #[serde(rename = "u")]
    pub mux_order: usize,
}

/// Slack allowed on the cache-capacity constraint.
pub const CAPACITY_SLACK: f64 = 1e-9;

impl Policy {
    /// Nothing cached, nothing multicast: pure unicast delivery.
    pub fn unicast_only(n_files: usize, mux_order: usize) -> Self {
        Policy {
            cache_weights: vec![0.0; n_files],
            beta: vec![0.0; n_files],
            mux_order,
        }
    }

    pub fn alpha(&self, n: usize) -> f64 {
        1.0 / self.beta[n]
    }

    pub fn beta_sum(&self) -> f64 {
        crate::specfun::sum::compensated_sum(self.beta.iter().copied())
    }

    pub fn violations(&self, scenario: &Scenario) -> Vec<FieldError> {
        let mut out = Vec::new();
        let n = scenario.n_files;
        if self.cache_weights.len() != n {
            out.push(FieldError {
                field: "p",
                message: format!("expected {n} cache weights, got {}", self.cache_weights.len()),
            });
        }
        if self.beta.len() != n {
            out.push(FieldError {
                field: "beta",
                message: format!("expected {n} bandwidth entries, got {}", self.beta.len()),
            });
        }
        if self.cache_weights.iter().any(|p| !(0.0..=1.0).contains(p)) {
            out.push(FieldError {
                field: "p",
                message: "cache weights must lie in [0, 1]".into(),
            });
        }
        let total: f64 = self.cache_weights.iter().sum();
        if total > scenario.cache_capacity as f64 + CAPACITY_SLACK {
            out.push(FieldError {
                field: "p",
                message: format!("cache weights sum to {total}, above capacity {}", scenario.cache_capacity),
            });
        }
        if self.beta.iter().any(|b| !(*b >= 0.0) || !b.is_finite()) {
            out.push(FieldError {
                field: "beta",
                message: "beta entries must be finite and non-negative".into(),
            });
        }
        if self.mux_order < 1 || self.mux_order > scenario.n_antennas {
            out.push(FieldError {
                field: "u",
                message: format!("u must lie in 1..={}", scenario.n_antennas),
            });
        }
        out
    }

    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        let v = self.violations(scenario);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(v))
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("policy serializes")
    }
}

/// Evaluated resource consumption (Hz) and outage probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeliveryMetrics {
    pub w_mc_eff: f64,
    pub w_uc: f64,
    pub w_tot: f64,
    pub o_mc: f64,
    pub o_uc: f64,
    pub o_tot: f64,
}

impl DeliveryMetrics {
    pub const CSV_HEADER: [&'static str; 6] = ["w_mc_eff", "w_uc", "w_tot", "o_mc", "o_uc", "o_tot"];

    pub fn as_row(&self) -> [f64; 6] {
        [self.w_mc_eff, self.w_uc, self.w_tot, self.o_mc, self.o_uc, self.o_tot]
    }
}
