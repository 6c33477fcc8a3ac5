//! Parameter sweeps: re-solve the delivery problem at every point and tabulate
//! the metrics.

use std::io::Write;

use clap::ValueEnum;
use hycast::geomsim::{mc_aggregate_outage, mc_unicast, Estimate};
use hycast::hybrid::{self, demand_ratio};
use hycast::optimizer;
use hycast::popularity::zipf;
use hycast::scenario::{DeliveryMetrics, Policy, Scenario};
use rayon::prelude::*;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    #[value(name = "lambda_h")]
    LambdaH,
    #[value(name = "gamma_th")]
    GammaTh,
    #[value(name = "lambda_b")]
    LambdaB,
    #[value(name = "tau")]
    Tau,
    #[value(name = "M")]
    M,
}

impl SweepParam {
    pub fn column(&self) -> &'static str {
        match self {
            SweepParam::LambdaH => "lambda_h",
            SweepParam::GammaTh => "gamma_th",
            SweepParam::LambdaB => "lambda_b",
            SweepParam::Tau => "tau",
            SweepParam::M => "M",
        }
    }

    pub fn apply(&self, base: &Scenario, value: f64) -> hycast::Result<Scenario> {
        let mut s = base.clone();
        match self {
            SweepParam::LambdaH => s.lambda_hn = value,
            SweepParam::GammaTh => s.sinr_threshold = value,
            SweepParam::LambdaB => s.lambda_bs = value,
            SweepParam::Tau => s.zipf_skew = value,
            SweepParam::M => {
                if value.fract() != 0.0 || !(value >= 0.0) || value > usize::MAX as f64 {
                    return Err(hycast::Error::Domain(format!("cache capacity {value} is not a whole number")));
                }
                s.cache_capacity = value as usize;
            }
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Analytic,
    Mc,
    Both,
}

impl Mode {
    fn analytic(&self) -> bool {
        *self != Mode::Mc
    }

    fn mc(&self) -> bool {
        *self != Mode::Analytic
    }
}

/// How content is delivered at each point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    /// Optimised hybrid multicast/unicast.
    Hybrid,
    /// Unicast only, at the best multiplexing order.
    Spuc,
    /// Multicast only, the top files meeting a per-file outage target.
    Ompmc { target_outage: f64 },
}

impl Strategy {
    pub fn solve(&self, scenario: &Scenario) -> hycast::Result<(Policy, DeliveryMetrics)> {
        match *self {
            Strategy::Hybrid => optimizer::optimize(scenario),
            Strategy::Spuc => {
                let (u, metrics) = hybrid::best_spuc_baseline(scenario)?;
                Ok((Policy::unicast_only(scenario.n_files, u), metrics))
            }
            Strategy::Ompmc { target_outage } => {
                let b = hybrid::ompmc_only_baseline(scenario, target_outage)?;
                Ok((b.policy, b.metrics))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    /// Replications of the multicast outage, split across files.
    pub replications: u64,
    /// Torus windows of the unicast simulation.
    pub windows: u64,
    pub seed: u64,
}

/// Simulated counterpart of [`DeliveryMetrics`]. `w_mc_eff` is a
/// deterministic function of the policy and is not simulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McMetrics {
    pub w_uc: Estimate,
    pub o_mc: Estimate,
    pub o_uc: Estimate,
    pub w_tot: Estimate,
    pub o_tot: Estimate,
}

fn product_stderr(a: &Estimate, b: &Estimate) -> f64 {
    (a.mean * b.stderr).hypot(b.mean * a.stderr)
}

pub fn simulate(
    scenario: &Scenario,
    strategy: Strategy,
    policy: &Policy,
    w_mc_eff: f64,
    settings: &McSettings,
) -> hycast::Result<McMetrics> {
    let popularity = zipf(scenario.n_files, scenario.zipf_skew)?;
    let o_mc = mc_aggregate_outage(scenario, policy, &popularity, settings.replications, settings.seed)?;
    let (w_uc, o_uc) = if let Strategy::Ompmc { .. } = strategy {
        (Estimate::exact(0.0, 0), Estimate::exact(1.0, 0))
    } else {
        let uc = mc_unicast(scenario, policy.mux_order, demand_ratio(scenario), settings.windows, settings.seed)?;
        (uc.w_uc, uc.o_uc)
    };
    Ok(McMetrics {
        w_uc,
        o_mc,
        o_uc,
        w_tot: Estimate {
            mean: w_mc_eff + w_uc.mean * o_mc.mean,
            stderr: product_stderr(&w_uc, &o_mc),
            replications: settings.replications,
        },
        o_tot: Estimate {
            mean: o_uc.mean * o_mc.mean,
            stderr: product_stderr(&o_uc, &o_mc),
            replications: settings.replications,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub u: Option<usize>,
    pub analytic: Option<DeliveryMetrics>,
    pub mc: Option<McMetrics>,
    pub error: Option<String>,
}

fn sweep_point(
    base: &Scenario,
    param: SweepParam,
    value: f64,
    strategy: Strategy,
    mode: Mode,
    mc: &McSettings,
) -> SweepRow {
    let mut row = SweepRow {
        value,
        u: None,
        analytic: None,
        mc: None,
        error: None,
    };
    let outcome = (|| {
        let scenario = param.apply(base, value)?;
        let (policy, metrics) = strategy.solve(&scenario)?;
        row.u = Some(policy.mux_order);
        row.analytic = Some(metrics);
        if mode.mc() {
            row.mc = Some(simulate(&scenario, strategy, &policy, metrics.w_mc_eff, mc)?);
        }
        Ok::<_, hycast::Error>(())
    })();
    if let Err(e) = outcome {
        row.error = Some(e.to_string());
    }
    row
}

/// Evaluates every point (concurrently); rows come back in sweep order.
pub fn run(
    base: &Scenario,
    param: SweepParam,
    points: &[f64],
    strategy: Strategy,
    mode: Mode,
    mc: &McSettings,
) -> Vec<SweepRow> {
    points
        .par_iter()
        .map(|&v| sweep_point(base, param, v, strategy, mode, mc))
        .collect()
}

pub const MC_COLUMNS: [&str; 10] = [
    "w_uc_mc",
    "w_uc_mc_se",
    "o_mc_mc",
    "o_mc_mc_se",
    "o_uc_mc",
    "o_uc_mc_se",
    "w_tot_mc",
    "w_tot_mc_se",
    "o_tot_mc",
    "o_tot_mc_se",
];

pub fn header(param: SweepParam, mode: Mode) -> Vec<&'static str> {
    let mut h = vec![param.column(), "u"];
    if mode.analytic() {
        h.extend(DeliveryMetrics::CSV_HEADER);
    } else {
        h.push("w_mc_eff");
    }
    if mode.mc() {
        h.extend(MC_COLUMNS);
    }
    h.push("error");
    h
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn write_csv<W: Write>(out: W, param: SweepParam, mode: Mode, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(param, mode))?;
    for row in rows {
        let mut rec = vec![row.value.to_string(), row.u.map(|u| u.to_string()).unwrap_or_default()];
        if mode.analytic() {
            match &row.analytic {
                Some(m) => rec.extend(m.as_row().iter().map(|v| v.to_string())),
                None => rec.extend(std::iter::repeat_n(String::new(), 6)),
            }
        } else {
            rec.push(cell(row.analytic.map(|m| m.w_mc_eff)));
        }
        if mode.mc() {
            match &row.mc {
                Some(m) => {
                    for e in [m.w_uc, m.o_mc, m.o_uc, m.w_tot, m.o_tot] {
                        rec.push(e.mean.to_string());
                        rec.push(e.stderr.to_string());
                    }
                }
                None => rec.extend(std::iter::repeat_n(String::new(), MC_COLUMNS.len())),
            }
        }
        rec.push(row.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_must_be_whole() {
        let s = Scenario::reference();
        assert_eq!(SweepParam::M.apply(&s, 12.0).unwrap().cache_capacity, 12);
        assert!(SweepParam::M.apply(&s, 2.5).is_err());
        assert!(SweepParam::LambdaH.apply(&s, -1.0).is_err());
    }

    #[test]
    fn header_layouts() {
        assert_eq!(header(SweepParam::Tau, Mode::Analytic).len(), 9);
        assert_eq!(header(SweepParam::Tau, Mode::Mc).len(), 14);
        assert_eq!(header(SweepParam::Tau, Mode::Both).len(), 19);
    }

    #[test]
    fn errors_go_to_the_error_column() {
        let s = Scenario::reference();
        let mc = McSettings {
            replications: 1,
            windows: 1,
            seed: 1,
        };
        let rows = run(&s, SweepParam::M, &[1.5], Strategy::Spuc, Mode::Analytic, &mc);
        let mut buf = Vec::new();
        write_csv(&mut buf, SweepParam::M, Mode::Analytic, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let line = text.lines().nth(1).unwrap();
        assert!(line.starts_with("1.5,,,,,,,,"), "{line}");
        assert!(line.contains("whole number"));
    }
}
