mod common;

use proptest::prelude::*;
use redvote::compose::{run_workflow, validate_workflow, Expr};
use redvote::dsl::{parse, print, SourceFile};

use common::{example, rel, workflow};

fn reparse(text: &str) -> redvote::compose::Workflow {
    parse(&SourceFile::new("mem.rvm", text)).unwrap_or_else(|d| panic!("{d:?}\n{text}"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn parse_print_round_trip(w in workflow()) {
        let text = print(&w);
        let back = reparse(&text);
        prop_assert_eq!(&back, &w);
        prop_assert_eq!(print(&back), text);
    }

    #[test]
    fn scientific_literals_are_exact(m in 1u64..10_000_000, e in -300i32..300) {
        let text = format!("{m}e{e}");
        let w = reparse(&format!("workflow \"n\" {{ output x = {text}; }}"));
        prop_assert_eq!(&w.exports[0].value, &Expr::Num(text.parse::<f64>().unwrap()));
    }
}

#[test]
fn shipped_files_round_trip() {
    for name in ["case-study.rvm", "case-study-2.rvm"] {
        let w = parse(&SourceFile::read(&example(name)).unwrap()).unwrap();
        let text = print(&w);
        assert_eq!(reparse(&text), w);
        assert_eq!(print(&reparse(&text)), text);
    }
}

#[test]
fn shipped_case_study_matches_first_design() {
    let w = parse(&SourceFile::read(&example("case-study.rvm")).unwrap()).unwrap();
    let r = run_workflow(&validate_workflow(&w).unwrap()).unwrap();
    assert!(rel(r.export("HFR_2oo3").unwrap(), 3.33e-7) < 1e-2);
}

#[test]
fn canonical_case_study_text() {
    let w = parse(&SourceFile::read(&example("case-study.rvm")).unwrap()).unwrap();
    let expected = "\
workflow \"case-study\" {
  instance phi : builtin.failure2oo2 {
    PAR_1 = 1.666e-5;
    PAR_2 = 0.1;
    PAR_3 = 0.1;
  }

  instance mu : builtin.maintenance5 {
    PAR_4 = phi.PAR_4;
    PAR_5 = phi.PAR_5;
    PAR_6 = 1;
    PAR_7 = 0.01;
    PAR_8 = 0.0001;
    PAR_9 = 3;
  }

  output HFR_2oo3 = 3 * mu.PAR_10;
  output PAR_4 = phi.PAR_4;
  output PAR_5 = phi.PAR_5;
  output PAR_10 = mu.PAR_10;
  output MTBHE_2oo2 = 1 / phi.PAR_5;
  output MTBHE_2oo3 = 1 / (3 * phi.PAR_5);
}
";
    assert_eq!(print(&w), expected);
}

#[test]
fn every_rejection_is_positioned() {
    for text in [
        "",
        "workflow",
        "workflow \"w\" { instance }",
        "workflow \"w\" { output x = ; }",
        "workflow \"w\" { ctmc M { state A init; rate A -> A : 1; } }",
        "workflow \"w\" { ctmc M { state A init; state A; } }",
        "workflow \"w\" { bayes B { node X states () cpt (1); } }",
        "workflow \"w\" { output x = 1..2; }",
        "workflow \"w\" { output x = 0x10; }",
        "workflow \"w\" { output x = 1; } }",
        "workflow \"w\" { output x = 1 $ 2; }",
    ] {
        let diags = parse(&SourceFile::new("bad.rvm", text)).unwrap_err();
        assert!(!diags.is_empty(), "{text}");
        for d in &diags {
            assert!(d.line >= 1 && d.column >= 1, "{text}: {d}");
            assert!(d.to_string().starts_with("bad.rvm:"), "{d}");
        }
    }
}
