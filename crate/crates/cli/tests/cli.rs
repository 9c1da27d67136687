use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use jetforms_core::forms::DiffForm;
use jetforms_core::jet::{MultiIndex, ScalarExpr, Var, Q};
use jetforms_core::varcalc::{canonical_lepage, SourceForm};
use jetforms_dsl::{form_from_json, load, source_form_from_json};
use serde_json::Value;

fn problem(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../problems")
        .join(name)
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    fs::write(&path, text).unwrap();
    path
}

fn jetforms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jetforms"))
        .args(args)
        .env_remove("JETFORMS_MAX_ORDER")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn eta(i: usize) -> Q {
    if i == 0 {
        Q::one()
    } else {
        Q::from_int(-1)
    }
}

#[test]
fn electromagnetic_euler_lagrange_json() {
    let path = problem("em.jf");
    let o = jetforms(&["el", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let p = load(&fs::read_to_string(&path).unwrap(), 8).unwrap();
    let got = source_form_from_json(&p.chart, &v).unwrap();
    // −4 d_i F^{ij} with F_{ij} = A_{j,i} − A_{i,j}
    let a = |s: usize, j: &[usize]| ScalarExpr::var(Var::fiber(s, MultiIndex::new(j)));
    let components = (0..4)
        .map(|j| {
            (0..4).fold(ScalarExpr::zero(), |acc, i| {
                let d_f = a(j, &[i, i]).sub(&a(i, &[i, j]));
                acc.add(&d_f.scale(&(eta(i) * eta(j) * Q::from_int(-4))))
            })
        })
        .collect();
    assert_eq!(got, SourceForm::new(&p.chart, components).unwrap());
}

#[test]
fn klein_gordon_canonical_form_in_latex_and_json() {
    let path = problem("kg.jf");
    let o = jetforms(&[
        "lepage",
        "--kind",
        "canonical",
        path.to_str().unwrap(),
        "--format",
        "latex",
    ]);
    assert_eq!(code(&o), 0);
    let tex = stdout(&o);
    assert!(tex.starts_with("\\Phi_{\\lambda} = "), "{tex}");
    assert!(
        tex.contains("\\phi_{0} \\, \\omega^{\\phi} \\wedge \\omega_{0}"),
        "{tex}"
    );
    assert!(
        tex.contains("-\\phi_{3} \\, \\omega^{\\phi} \\wedge \\omega_{3}"),
        "{tex}"
    );

    let o = jetforms(&[
        "lepage",
        "--kind",
        "canonical",
        path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let p = load(&fs::read_to_string(&path).unwrap(), 8).unwrap();
    let form = form_from_json(&p.chart, &serde_json::from_str(&stdout(&o)).unwrap()).unwrap();
    // 𝓛 ω_0 + η^{ij} φ_j ω ∧ ω_i
    let phi = |j: &[usize]| ScalarExpr::var(Var::fiber(0, MultiIndex::new(j)));
    let w = DiffForm::contact(&p.chart, 0, MultiIndex::EMPTY);
    let mut expected = p.lagrangian.form();
    for i in 0..4 {
        expected = expected.add(
            &w.wedge(&DiffForm::omega_i(&p.chart, i))
                .mul_scalar(&phi(&[i]).scale(&eta(i))),
        );
    }
    assert_eq!(form, expected);
    assert_eq!(form, canonical_lepage(&p.lagrangian).unwrap().form);
}

#[test]
fn json_output_is_deterministic() {
    for name in ["kg.jf", "em.jf", "mech_oscillator.jf"] {
        let path = problem(name);
        let path = path.to_str().unwrap();
        for args in [
            vec!["el", path],
            vec!["vt", path],
            vec!["split", path],
            vec!["lepage", "--kind", "principal", path],
            vec!["lepage", "--kind", "canonical", path],
            vec!["check", "--closure", "--numeric", "4", "--seed", "9", path],
        ] {
            let mut args = args.clone();
            args.extend(["--format", "json"]);
            let a = jetforms(&args);
            let b = jetforms(&args);
            assert_eq!(a.stdout, b.stdout, "{args:?}");
            serde_json::from_slice::<Value>(&a.stdout).unwrap();
        }
    }
}

#[test]
fn closure_check_on_trivial_lagrangian() {
    let path = scratch(
        "trivial.jf",
        "chart { base x, y\n fields u, v\n order 2 }\nlagrangian {\n dtot(u*D(v,1) + x*u^2, 0) + dtot(v^3 - y*u*v, 1)\n + D(u,0)*D(v,1) - D(u,1)*D(v,0) }\n",
    );
    let o = jetforms(&[
        "check",
        "--closure",
        "--numeric",
        "20",
        "--seed",
        "42",
        path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["trivial"], true);
    assert_eq!(v["numeric"]["max_residual"], 0.0);
    assert_eq!(v["numeric"]["trials"], 20);
    assert_eq!(v["numeric"]["seed"], 42);
    assert_eq!(v["numeric"]["suite"], "closure");
    assert!(v["numeric"]["failures"].as_array().unwrap().is_empty());
}

#[test]
fn closure_fails_for_dynamical_lagrangian() {
    let o = jetforms(&["check", "--closure", problem("kg.jf").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let text = stdout(&o);
    assert!(text.contains("FAILED"));
    assert!(text.contains("--verbose shows all"));
    let o = jetforms(&[
        "check",
        "--closure",
        "--verbose",
        problem("kg.jf").to_str().unwrap(),
    ]);
    assert!(!stdout(&o).contains("--verbose shows all"));
}

#[test]
fn lepage_and_homotopy_checks_pass() {
    for name in ["kg.jf", "em.jf", "mech_oscillator.jf"] {
        let path = problem(name);
        let o = jetforms(&[
            "check",
            "--lepage",
            "--numeric",
            "10",
            "--seed",
            "1",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{name}: {}", stdout(&o));
        let o = jetforms(&["check", "--homotopy", path.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{name}: {}", stdout(&o));
    }
}

#[test]
fn split_reassembles() {
    let o = jetforms(&[
        "split",
        problem("em.jf").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["lagrangian_vt", "alpha", "d_alpha"] {
        assert!(v[key]["terms"].is_array(), "{key}");
    }
    assert_eq!(v["alpha"]["degree"], 3);
}

#[test]
fn noether_energy_of_oscillator() {
    let o = jetforms(&[
        "noether",
        "--xi",
        "t=1",
        problem("mech_oscillator.jf").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "(-1/2*q^2*w2 - 1/2*D(q,0)^2)");
    let o = jetforms(&[
        "noether",
        "--xi",
        "p=1",
        problem("mech_oscillator.jf").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    let o = jetforms(&[
        "noether",
        "--xi",
        "t=q",
        problem("mech_oscillator.jf").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn input_errors_exit_with_two() {
    assert_eq!(code(&jetforms(&["frobnicate"])), 2);
    assert_eq!(
        code(&jetforms(&[
            "el",
            "--bogus",
            problem("kg.jf").to_str().unwrap()
        ])),
        2
    );
    assert_eq!(code(&jetforms(&["el", "/nonexistent/file.jf"])), 2);
    assert_eq!(
        code(&jetforms(&[
            "lepage",
            "--kind",
            "reduced",
            problem("kg.jf").to_str().unwrap()
        ])),
        2
    );
    let bad = scratch(
        "bad.jf",
        "chart { base x\n fields u }\nlagrangian { u * }\n",
    );
    let o = jetforms(&["el", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("3:18"), "{err}");
    assert!(err.contains("expected one of"), "{err}");
    let second = scratch(
        "second.jf",
        "chart { base x\n fields u }\nlagrangian { D(u,0)^2*u }\n",
    );
    let o = jetforms(&["lepage", "--kind", "fundamental", second.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let second = scratch(
        "second_order.jf",
        "chart { base x\n fields u\n order 2 }\nlagrangian { D(u,0,0)^2 }\n",
    );
    assert_eq!(
        code(&jetforms(&[
            "lepage",
            "--kind",
            "fundamental",
            second.to_str().unwrap()
        ])),
        2
    );
}

#[test]
fn max_order_flag_and_environment() {
    let kg = problem("kg.jf");
    let kg = kg.to_str().unwrap();
    assert_eq!(code(&jetforms(&["el", kg, "--max-order", "1"])), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_jetforms"))
        .args(["el", kg])
        .env("JETFORMS_MAX_ORDER", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(code(&jetforms(&["el", kg, "--max-order", "2"])), 0);
}

#[test]
fn out_flag_writes_file() {
    let target = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("el.txt");
    let _ = fs::remove_file(&target);
    let o = jetforms(&[
        "el",
        problem("mech_oscillator.jf").to_str().unwrap(),
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert_eq!(
        fs::read_to_string(&target).unwrap().trim(),
        "E[q] = -q*w2 - D(q,0,0)"
    );
}
