mod common;

use redvote::bayes;
use redvote::ctmc;
use redvote::nmr::{
    build_failure_bn, build_maintenance_ctmc, failure_interface, hfr_2oo3_from_maintenance, mtbhe_conversion,
    probability_true, FailureParams, MaintenanceLevel, MaintenanceParams,
};

use common::rel;

/// Published marginals of the failure network at its default parameters.
const TABLE: [(&str, &str, f64); 24] = [
    ("Detectable_Fault_A", "True", 1.5e-6),
    ("Detectable_Fault_B", "True", 1.5e-6),
    ("Error_due_to_Transient_A", "True", 1.5e-6),
    ("Error_due_to_Transient_B", "True", 1.5e-6),
    ("Excl_A", "True", 1e-10),
    ("Excl_B", "True", 1e-10),
    ("Fault_A", "True", 1.6666e-5),
    ("Fault_B", "True", 1.6666e-5),
    ("Fault_detectability_A", "Detectable", 0.9),
    ("Fault_detectability_B", "Detectable", 0.9),
    ("Fault_type_A", "Transient", 0.9),
    ("Fault_type_B", "Transient", 0.9),
    ("Non_detectable_Fault_A", "True", 1.6666e-7),
    ("Non_detectable_Fault_B", "True", 1.6666e-7),
    ("Permanent_Fault_A", "True", 1.6666e-6),
    ("Permanent_Fault_B", "True", 1.6666e-6),
    ("Same_output_alterations", "True", 0.1),
    ("Transient_Fault_A", "True", 1.5e-5),
    ("Transient_Fault_B", "True", 1.5e-5),
    ("UNCORR_A", "True", 2.1912e-6),
    ("UNCORR_B", "True", 2.1912e-6),
    ("Undetected_permanent_A", "True", 6.9164e-7),
    ("Undetected_permanent_B", "True", 6.9164e-7),
    ("UNSAFE_OUTPUT", "True", 4.8056e-13),
];

#[test]
fn default_marginals_match_table() {
    let net = build_failure_bn(&FailureParams::default()).unwrap();
    assert_eq!(net.len(), TABLE.len());
    for (name, state, want) in TABLE {
        let d = bayes::marginal(&net, net.var_id(name).unwrap(), &Default::default()).unwrap();
        let got = d.p(state).unwrap();
        assert!(rel(got, want) <= 5e-3, "{name}={state}: {got} vs {want}");
    }
}

#[test]
fn default_marginals_match_closed_form() {
    let p1 = 1.6666e-5;
    let transient = p1 * 0.9 * 0.1;
    let permanent = p1 * 0.1;
    let undetected = permanent * 0.1 + permanent * 0.9 * 0.35;
    let uncorr = transient + undetected;
    let net = build_failure_bn(&FailureParams::default()).unwrap();
    assert!(rel(probability_true(&net, "Undetected_permanent_A").unwrap(), undetected) < 1e-12);
    assert!(rel(probability_true(&net, "UNCORR_A").unwrap(), uncorr) < 1e-12);
}

#[test]
fn mtbhe_of_published_hazard_rate() {
    let (m2, m3) = mtbhe_conversion(4.8056e-13).unwrap();
    assert!(rel(m3, 6.9362e11) <= 5e-3, "{m3}");
    assert!(rel(m2, 3.0 * m3) < 1e-15);
    assert!(mtbhe_conversion(0.0).is_err());
    assert!(mtbhe_conversion(f64::NAN).is_err());
}

#[test]
fn posteriors_given_unsafe_output() {
    let net = build_failure_bn(&FailureParams::default()).unwrap();
    let ev = net.evidence([("UNSAFE_OUTPUT", "True")]).unwrap();
    for (name, want) in [
        ("Error_due_to_Transient_A", 0.684),
        ("Undetected_permanent_A", 0.316),
        ("Non_detectable_Fault_A", 0.076),
    ] {
        let d = bayes::marginal(&net, net.var_id(name).unwrap(), &ev).unwrap();
        assert!((d.p("True").unwrap() - want).abs() <= 3e-3, "{name}: {:?}", d.probs);
    }
}

#[test]
fn root_evidence_is_a_point_mass() {
    let net = build_failure_bn(&FailureParams::default()).unwrap();
    let ev = net.evidence([("Fault_A", "True")]).unwrap();
    let d = bayes::marginal(&net, net.var_id("Fault_A").unwrap(), &ev).unwrap();
    assert_eq!(d.probs, vec![1.0, 0.0]);
}

#[test]
fn maintenance_models_agree() {
    let p = MaintenanceParams::new(2.19e-6, 4.8e-13, 1.0, 1e-2, 1e-4, 3.0);
    let mut hfr = Vec::new();
    for level in [MaintenanceLevel::FourState, MaintenanceLevel::FiveState, MaintenanceLevel::EightState] {
        let chain = build_maintenance_ctmc(level, &p).unwrap();
        let pi = ctmc::steady_state(&chain).unwrap();
        hfr.push(hfr_2oo3_from_maintenance(&pi).unwrap().hfr_2oo3.unwrap());
    }
    assert!(rel(hfr[1], 3.33e-7) < 1e-2, "{hfr:?}");
    assert!(rel(hfr[0], hfr[1]) < 1e-2, "{hfr:?}");
    assert!(rel(hfr[2], hfr[1]) < 1e-2, "{hfr:?}");
}

#[test]
fn zero_repair_failure_rate_drops_unpowered_state() {
    let p = MaintenanceParams::new(2.19e-6, 4.8e-13, 1.0, 1e-2, 0.0, 3.0);
    let chain = build_maintenance_ctmc(MaintenanceLevel::FiveState, &p).unwrap();
    assert_eq!(ctmc::reachable_closed_class(&chain).unwrap(), vec![0, 1, 2, 3]);
    assert_eq!(ctmc::steady_state(&chain).unwrap().get("S4"), Some(0.0));
}

#[test]
fn interface_of_first_design() {
    let iv = failure_interface(&FailureParams::new(1.666e-5, 0.1, 0.1)).unwrap();
    assert!(rel(iv.par4.unwrap(), 2.19e-6) < 1e-2);
    assert!(rel(iv.par5.unwrap(), 4.8e-13) < 1e-2);
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(failure_interface(&FailureParams::new(1.5, 0.1, 0.1)).is_err());
    let p = MaintenanceParams::new(1e-6, 3e-6, 1.0, 1e-2, 1e-4, 3.0);
    assert!(build_maintenance_ctmc(MaintenanceLevel::FiveState, &p).is_err());
}
