//! Builders for the 2oo2 hazardous-failure network and the imperfect
//! maintenance chains, plus the 2oo2 → 2oo3 conversions.
//!
//! # Failure network
//!
//! Per unit `X ∈ {A, B}`, a fault (`Fault_X`) is either transient or
//! permanent (`Fault_type_X`). Transient faults become an undetected
//! activated error with probability `p_activate`. Permanent faults are either
//! non-diagnosable (always undetected) or detectable, in which case they stay
//! undetected through the one-hour reference interval with probability
//! `p_miss`. Either path gives an incorrect unit output `UNCORR_X`.
//!
//! The system output is unsafe when both units are wrong *and* wrong in the
//! same way, or when one unit is wrong and its exclusion logic fails:
//!
//! ```text
//! UNSAFE_OUTPUT = (UNCORR_A ∧ UNCORR_B ∧ Same_output_alterations)
//!               ∨ (UNCORR_A ∧ Excl_A) ∨ (UNCORR_B ∧ Excl_B)
//! ```
//!
//! `p_activate = 0.1` and `p_miss = 0.35` are the values implied by the
//! published marginals (1.5e-6 / 1.5e-5 and (6.9164e-7 − 1.6666e-7) / 1.5e-6).
//!
//! # Maintenance chains
//!
//! Five-state reference model, initial state `S0`:
//!
//! | from | to | rate |
//! |------|----|------|
//! | S0 | S1 | 2·par4 − par5 (safe shutdown) |
//! | S0 | S3 | par5 (unsafe shutdown) |
//! | S1 | S0 | par6 (restart) |
//! | S1 | S2 | par5 |
//! | S2 | S0 | (1 − par7)·par6 (correct maintenance) |
//! | S2 | S3 | par7·par6 (incorrect maintenance) |
//! | S2 | S4 | par8 (power loss) |
//! | S3 | S2 | 2·par4 − par5 |
//! | S3 | S4 | par8 (power loss) |
//! | S4 | S3 | par9 (power restore) |
//!
//! The maintenance transitions out of `S2` follow the state semantics (a
//! *correct* repair returns the system to `S0`); the literal parameter list
//! this model is usually quoted with swaps the two labels, and that variant
//! does not reproduce the published hazard rates. Power loss goes `S3 → S4`
//! and restoration `S4 → S3`.
//!
//! The four-state model drops `S4` and folds the power cycle into
//! `S2 → S3 = par7·par6 + par8`.
//!
//! The eight-state model is a reconstruction: `S0` splits into `S0'` (no
//! permanent faults, initial) and `S0''` (latent diagnosable permanent
//! fault), with `S5`/`S6` mirroring `S2`/`S4` for diagnosable faults:
//! `S0' → S0''` at `diag_fault_rate`, `S0'' → S5` at 2·par4 − par5,
//! `S5 → S0'` at (1 − par7)·par6, `S5 → S0''` at par7·par6, `S5 → S6` at
//! par8 and `S6 → S5` at par9. Both `S0'` and `S0''` carry the `S1`/`S3`
//! exits of `S0`; repairs from `S1` and `S2` return to `S0'`.
//!
//! The 2oo3 hazard rate is taken as three times the 2oo2 one, because a
//! 2oo3 system behaves as the three 2oo2 pairs AB, BC, AC.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bayes::{self, BayesError, BayesNet, Evidence, NetBuilder, VarId};
use crate::ctmc::{CtmcBuilder, CtmcError, Ctmc, StationaryDistribution};

pub const TEMPLATE_FAILURE_2OO2: &str = "failure2oo2";
pub const TEMPLATE_MAINTENANCE_4: &str = "maintenance4";
pub const TEMPLATE_MAINTENANCE_5: &str = "maintenance5";
pub const TEMPLATE_MAINTENANCE_8: &str = "maintenance8";

/// Label of the hazardous "up with a non-diagnosable permanent fault" state.
pub const HAZARD_STATE: &str = "S3";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("parameter {name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("par5 = {par5} exceeds 2·par4 = {}", 2.0 * .par4)]
    Par5ExceedsTwicePar4 { par4: f64, par5: f64 },
    #[error("safe-shutdown rate 2·par4 − par5 = {0} must be > 0")]
    NonPositiveShutdownRate(f64),
    #[error("hazard rate must be finite and > 0, got {0}")]
    NonPositiveHazardRate(f64),
    #[error("maintenance chain has no state `{HAZARD_STATE}`")]
    MissingHazardState,
    #[error(transparent)]
    Bayes(#[from] BayesError),
    #[error(transparent)]
    Ctmc(#[from] CtmcError),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ModelError::OutOfRange {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

fn check_nonneg(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::OutOfRange {
            name,
            value,
            range: "[0, inf)",
        })
    }
}

/// Inputs of the failure model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureParams {
    /// Per-hour fault probability of one unit.
    pub par1: f64,
    /// Fraction of permanent faults that cannot be diagnosed.
    pub par2: f64,
    /// Probability that two faulty units produce identical outputs.
    pub par3: f64,
    pub transient_ratio: f64,
    /// Failure probability of a unit's exclusion logic.
    pub excl_fail: f64,
    /// Probability that a transient fault yields an undetected activated error.
    pub p_activate: f64,
    /// Probability that a detectable permanent fault stays undetected in the reference hour.
    pub p_miss: f64,
}

impl FailureParams {
    pub const DEFAULT_TRANSIENT_RATIO: f64 = 0.9;
    pub const DEFAULT_EXCL_FAIL: f64 = 1e-10;
    pub const DEFAULT_P_ACTIVATE: f64 = 0.1;
    pub const DEFAULT_P_MISS: f64 = 0.35;

    pub fn new(par1: f64, par2: f64, par3: f64) -> Self {
        FailureParams {
            par1,
            par2,
            par3,
            transient_ratio: Self::DEFAULT_TRANSIENT_RATIO,
            excl_fail: Self::DEFAULT_EXCL_FAIL,
            p_activate: Self::DEFAULT_P_ACTIVATE,
            p_miss: Self::DEFAULT_P_MISS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("par1", self.par1)?;
        check_unit("par2", self.par2)?;
        check_unit("par3", self.par3)?;
        check_unit("transient_ratio", self.transient_ratio)?;
        check_unit("excl_fail", self.excl_fail)?;
        check_unit("p_activate", self.p_activate)?;
        check_unit("p_miss", self.p_miss)
    }
}

impl Default for FailureParams {
    /// The reference parameter set of the failure-model table.
    fn default() -> Self {
        FailureParams::new(1.6666e-5, 0.1, 0.1)
    }
}

/// Inputs of the maintenance models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaintenanceParams {
    /// Per-hour error probability of a single unit.
    pub par4: f64,
    /// Per-hour hazardous-failure probability of the 2oo2 system.
    pub par5: f64,
    /// Repairs per hour (1 / MTTR).
    pub par6: f64,
    /// Fraction of wrong maintenance interventions.
    pub par7: f64,
    /// Power-line failures per hour (1 / MTBF).
    pub par8: f64,
    /// Power restorations per hour (1 / MTTRS).
    pub par9: f64,
    /// Rate of diagnosable permanent faults; only the eight-state model uses it.
    #[serde(default)]
    pub diag_fault_rate: f64,
}

impl MaintenanceParams {
    pub fn new(par4: f64, par5: f64, par6: f64, par7: f64, par8: f64, par9: f64) -> Self {
        MaintenanceParams {
            par4,
            par5,
            par6,
            par7,
            par8,
            par9,
            diag_fault_rate: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("par4", self.par4)?;
        check_unit("par5", self.par5)?;
        check_unit("par7", self.par7)?;
        check_nonneg("par6", self.par6)?;
        check_nonneg("par8", self.par8)?;
        check_nonneg("par9", self.par9)?;
        check_nonneg("diag_fault_rate", self.diag_fault_rate)?;
        if self.par5 > 2.0 * self.par4 {
            return Err(ModelError::Par5ExceedsTwicePar4 {
                par4: self.par4,
                par5: self.par5,
            });
        }
        Ok(())
    }

    /// Safe-shutdown rate: at least one unit fails, minus the unsafe case.
    pub fn shutdown_rate(&self) -> f64 {
        2.0 * self.par4 - self.par5
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MaintenanceLevel {
    FourState,
    FiveState,
    EightState,
}

impl MaintenanceLevel {
    pub fn template_name(self) -> &'static str {
        match self {
            MaintenanceLevel::FourState => TEMPLATE_MAINTENANCE_4,
            MaintenanceLevel::FiveState => TEMPLATE_MAINTENANCE_5,
            MaintenanceLevel::EightState => TEMPLATE_MAINTENANCE_8,
        }
    }
}

/// Values exchanged between the failure and maintenance models.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct InterfaceValues {
    pub par4: Option<f64>,
    pub par5: Option<f64>,
    /// Steady-state probability of `S3`.
    pub par10: Option<f64>,
    pub hr_2oo2: Option<f64>,
    pub hfr_2oo3: Option<f64>,
    pub mtbhe_2oo2: Option<f64>,
    pub mtbhe_2oo3: Option<f64>,
}

fn bool_cpt(f: impl Fn(&[bool]) -> f64, parents: usize) -> Vec<f64> {
    // Boolean variables are ordered (True, False), so state 0 is true.
    let mut table = Vec::with_capacity(2 << parents);
    for row in 0..(1usize << parents) {
        let bits: Vec<bool> = (0..parents)
            .map(|k| (row >> (parents - 1 - k)) & 1 == 0)
            .collect();
        let p = f(&bits);
        table.push(p);
        table.push(1.0 - p);
    }
    table
}

fn det(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

const BOOL: &[&str] = &["True", "False"];

/// Names of the per-unit variables, `{unit}` replaced by `A` or `B`.
pub const UNIT_VARIABLES: [&str; 10] = [
    "Fault_{unit}",
    "Fault_type_{unit}",
    "Transient_Fault_{unit}",
    "Permanent_Fault_{unit}",
    "Fault_detectability_{unit}",
    "Detectable_Fault_{unit}",
    "Non_detectable_Fault_{unit}",
    "Error_due_to_Transient_{unit}",
    "Undetected_permanent_{unit}",
    "UNCORR_{unit}",
];

fn unit_chain(b: &mut NetBuilder, p: &FailureParams, unit: &str) -> VarId {
    let name = |base: &str| base.replace("{unit}", unit);
    let fault = b.variable(&name(UNIT_VARIABLES[0]), BOOL);
    let kind = b.variable(&name(UNIT_VARIABLES[1]), &["Transient", "Permanent"]);
    let transient = b.variable(&name(UNIT_VARIABLES[2]), BOOL);
    let permanent = b.variable(&name(UNIT_VARIABLES[3]), BOOL);
    let detectability = b.variable(&name(UNIT_VARIABLES[4]), &["Detectable", "Non_detectable"]);
    let detectable = b.variable(&name(UNIT_VARIABLES[5]), BOOL);
    let non_detectable = b.variable(&name(UNIT_VARIABLES[6]), BOOL);
    let activated = b.variable(&name(UNIT_VARIABLES[7]), BOOL);
    let undetected = b.variable(&name(UNIT_VARIABLES[8]), BOOL);
    let uncorr = b.variable(&name(UNIT_VARIABLES[9]), BOOL);

    b.cpt(fault, &[], vec![p.par1, 1.0 - p.par1]);
    b.cpt(kind, &[], vec![p.transient_ratio, 1.0 - p.transient_ratio]);
    // Fault_type state 0 is Transient, which bool_cpt reads as `true`.
    b.cpt(transient, &[fault, kind], bool_cpt(|v| det(v[0] && v[1]), 2));
    b.cpt(permanent, &[fault, kind], bool_cpt(|v| det(v[0] && !v[1]), 2));
    b.cpt(detectability, &[], vec![1.0 - p.par2, p.par2]);
    b.cpt(detectable, &[permanent, detectability], bool_cpt(|v| det(v[0] && v[1]), 2));
    b.cpt(non_detectable, &[permanent, detectability], bool_cpt(|v| det(v[0] && !v[1]), 2));
    b.cpt(
        activated,
        &[transient],
        bool_cpt(|v| if v[0] { p.p_activate } else { 0.0 }, 1),
    );
    b.cpt(
        undetected,
        &[non_detectable, detectable],
        bool_cpt(
            |v| match (v[0], v[1]) {
                (true, _) => 1.0,
                (false, true) => p.p_miss,
                (false, false) => 0.0,
            },
            2,
        ),
    );
    b.cpt(uncorr, &[activated, undetected], bool_cpt(|v| det(v[0] || v[1]), 2));
    uncorr
}

/// The 2oo2 hazardous-failure network (24 binary variables).
pub fn build_failure_bn(params: &FailureParams) -> Result<BayesNet> {
    params.validate()?;
    let mut b = NetBuilder::new();
    let uncorr_a = unit_chain(&mut b, params, "A");
    let uncorr_b = unit_chain(&mut b, params, "B");
    let excl_a = b.variable("Excl_A", BOOL);
    let excl_b = b.variable("Excl_B", BOOL);
    let same = b.variable("Same_output_alterations", BOOL);
    let unsafe_out = b.variable("UNSAFE_OUTPUT", BOOL);
    b.cpt(excl_a, &[], vec![params.excl_fail, 1.0 - params.excl_fail]);
    b.cpt(excl_b, &[], vec![params.excl_fail, 1.0 - params.excl_fail]);
    b.cpt(same, &[], vec![params.par3, 1.0 - params.par3]);
    b.cpt(
        unsafe_out,
        &[same, uncorr_a, uncorr_b, excl_a, excl_b],
        bool_cpt(
            |v| {
                let (same, ua, ub, xa, xb) = (v[0], v[1], v[2], v[3], v[4]);
                det((ua && ub && same) || (ua && xa) || (ub && xb))
            },
            5,
        ),
    );
    Ok(b.build()?)
}

/// Prior probability that the named boolean variable is `True`.
pub fn probability_true(net: &BayesNet, name: &str) -> Result<f64> {
    let id = net
        .var_id(name)
        .ok_or_else(|| BayesError::UnknownVariable(name.to_string()))?;
    let d = bayes::marginal(net, id, &Evidence::new())?;
    Ok(d.probs[0])
}

/// Solves the failure network: `par4 = P(UNCORR_A)`, `par5 = P(UNSAFE_OUTPUT)`.
pub fn failure_interface(params: &FailureParams) -> Result<InterfaceValues> {
    let net = build_failure_bn(params)?;
    let par4 = probability_true(&net, "UNCORR_A")?;
    let par5 = probability_true(&net, "UNSAFE_OUTPUT")?;
    let mtbhe = mtbhe_conversion(par5).ok();
    Ok(InterfaceValues {
        par4: Some(par4),
        par5: Some(par5),
        hr_2oo2: Some(par5),
        mtbhe_2oo2: mtbhe.map(|m| m.0),
        mtbhe_2oo3: mtbhe.map(|m| m.1),
        ..InterfaceValues::default()
    })
}

/// `(1 / hr, 1 / (3·hr))` in hours.
pub fn mtbhe_conversion(hr_2oo2: f64) -> Result<(f64, f64)> {
    if !(hr_2oo2.is_finite() && hr_2oo2 > 0.0) {
        return Err(ModelError::NonPositiveHazardRate(hr_2oo2));
    }
    let mtbhe_2oo2 = 1.0 / hr_2oo2;
    Ok((mtbhe_2oo2, mtbhe_2oo2 / 3.0))
}

pub fn build_maintenance_ctmc(level: MaintenanceLevel, p: &MaintenanceParams) -> Result<Ctmc> {
    p.validate()?;
    let shutdown = p.shutdown_rate();
    if shutdown.is_nan() || shutdown <= 0.0 {
        return Err(ModelError::NonPositiveShutdownRate(shutdown));
    }
    let repair_ok = (1.0 - p.par7) * p.par6;
    let repair_bad = p.par7 * p.par6;
    let chain = match level {
        MaintenanceLevel::FourState => CtmcBuilder::new()
            .states(&["S0", "S1", "S2", "S3"])
            .initial("S0")
            .rate("S0", "S1", shutdown)
            .rate("S0", "S3", p.par5)
            .rate("S1", "S0", p.par6)
            .rate("S1", "S2", p.par5)
            .rate("S2", "S0", repair_ok)
            .rate("S2", "S3", repair_bad + p.par8)
            .rate("S3", "S2", shutdown),
        MaintenanceLevel::FiveState => CtmcBuilder::new()
            .states(&["S0", "S1", "S2", "S3", "S4"])
            .initial("S0")
            .rate("S0", "S1", shutdown)
            .rate("S0", "S3", p.par5)
            .rate("S1", "S0", p.par6)
            .rate("S1", "S2", p.par5)
            .rate("S2", "S0", repair_ok)
            .rate("S2", "S3", repair_bad)
            .rate("S2", "S4", p.par8)
            .rate("S3", "S2", shutdown)
            .rate("S3", "S4", p.par8)
            .rate("S4", "S3", p.par9),
        MaintenanceLevel::EightState => CtmcBuilder::new()
            .states(&["S0'", "S0''", "S1", "S2", "S3", "S4", "S5", "S6"])
            .initial("S0'")
            .rate("S0'", "S0''", p.diag_fault_rate)
            .rate("S0'", "S1", shutdown)
            .rate("S0'", "S3", p.par5)
            .rate("S0''", "S1", shutdown)
            .rate("S0''", "S3", p.par5)
            .rate("S0''", "S5", shutdown)
            .rate("S1", "S0'", p.par6)
            .rate("S1", "S2", p.par5)
            .rate("S2", "S0'", repair_ok)
            .rate("S2", "S3", repair_bad)
            .rate("S2", "S4", p.par8)
            .rate("S3", "S2", shutdown)
            .rate("S3", "S4", p.par8)
            .rate("S4", "S3", p.par9)
            .rate("S5", "S0'", repair_ok)
            .rate("S5", "S0''", repair_bad)
            .rate("S5", "S6", p.par8)
            .rate("S6", "S5", p.par9),
    };
    Ok(chain.build()?)
}

/// `par10 = π(S3)` and `hfr_2oo3 = 3·par10`.
pub fn hfr_2oo3_from_maintenance(pi: &StationaryDistribution) -> Result<InterfaceValues> {
    let par10 = pi.get(HAZARD_STATE).ok_or(ModelError::MissingHazardState)?;
    let hfr_2oo3 = 3.0 * par10;
    Ok(InterfaceValues {
        par10: Some(par10),
        hfr_2oo3: Some(hfr_2oo3),
        mtbhe_2oo3: (hfr_2oo3 > 0.0).then(|| 1.0 / hfr_2oo3),
        ..InterfaceValues::default()
    })
}
