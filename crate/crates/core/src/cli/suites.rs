use clap::ValueEnum;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::coeff::{factorial, int, pow_rational, Rational};
use crate::graphs::{
    decomposition_violations, enumerated_gf, for_each_ordered_trivalent, graph_master_product, graph_sum_oracle,
    multigraph_classes, multiplicities_reconcile, rooted_tree_count, rooted_tree_formula, GraphFilter,
    MultigraphSignature, MAX_VERTICES,
};
use crate::operators::{
    apply_operator, beta_from_operator, exp_form_identity, gluing_count, gluing_count_formula, main_theorem_pipeline,
    proportionality, q31_power, top_relation_ratio, verify_poli_vs_cminus, DiffOperator,
};
use crate::polyring::{Polynomial, RingDescriptor};
use crate::series::{
    beta_coefficients, check_fz_index, closed_form_gf, diagonal_checks, general_fz_relation, gminus_lf_coefficient,
    master_series, omega_evaluation, omega_prime_ev, top_fz_relation, w_evaluation, zu_evaluation, ClosedForm, RSeries,
};
use crate::surfaces::{gluing_and_capping_intertwine, gluing_intertwines, surface_family};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Operators,
    Graphs,
    Series,
    #[value(name = "appendixB")]
    Enumeration,
    #[value(name = "appendixC")]
    Diagonal,
    PoliVsCminus,
    #[value(name = "main-theorem")]
    PhiGrading,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Operators => "operators",
            Suite::Graphs => "graphs",
            Suite::Series => "series",
            Suite::Enumeration => "appendixB",
            Suite::Diagonal => "appendixC",
            Suite::PoliVsCminus => "poli-vs-cminus",
            Suite::PhiGrading => "main-theorem",
        }
    }
}

/// One identity checked exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub holds: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "suite": self.suite,
            "all_hold": self.all_hold(),
            "checks": self.checks.iter().map(|c| json!({
                "name": c.name,
                "holds": c.holds,
                "detail": c.detail,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("suite {}\n", self.suite);
        for c in &self.checks {
            let mark = if c.holds { "PASS" } else { "FAIL" };
            out.push_str(&format!("{mark} {} {}\n", c.name, c.detail));
        }
        out.push_str(if self.all_hold() { "all checks hold\n" } else { "some checks fail\n" });
        out
    }
}

struct Builder {
    checks: Vec<Check>,
}

impl Builder {
    fn check(&mut self, name: impl Into<String>, holds: bool, detail: Value) {
        self.checks.push(Check { name: name.into(), holds, detail });
    }

    /// Records a failed check when a computation errors instead of aborting the suite.
    fn try_check<E: std::fmt::Display>(&mut self, name: impl Into<String>, r: Result<(bool, Value), E>) {
        match r {
            Ok((holds, detail)) => self.check(name, holds, detail),
            Err(e) => self.check(name, false, json!({ "error": e.to_string() })),
        }
    }
}

/// Runs a suite. `k` bounds the operator-side index and `truncation` the
/// series order or graph size, each with a suite-specific default. Errors
/// are out-of-range parameters.
pub fn run_suite(suite: Suite, k: Option<u32>, truncation: Option<u32>) -> Result<SuiteReport, String> {
    let mut b = Builder { checks: Vec::new() };
    match suite {
        Suite::Operators => operators(&mut b, bounded("--k", k.unwrap_or(3), 1, 3)?),
        Suite::Graphs => graphs(&mut b, bounded("--truncation", truncation.unwrap_or(6), 0, MAX_VERTICES as u32)?),
        Suite::Series => series(&mut b, bounded("--truncation", truncation.unwrap_or(6), 0, 8)?),
        Suite::Enumeration => enumeration_suite(&mut b, bounded("--truncation", truncation.unwrap_or(4), 1, 4)?),
        Suite::Diagonal => diagonal_suite(&mut b, bounded("--truncation", truncation.unwrap_or(20), 1, 30)?),
        Suite::PoliVsCminus => poli_vs_cminus(&mut b),
        Suite::PhiGrading => phi_grading(&mut b, bounded("--k", k.unwrap_or(1), 1, 2)?),
    }
    Ok(SuiteReport { suite: suite.name(), checks: b.checks })
}

fn bounded(flag: &str, v: u32, lo: u32, hi: u32) -> Result<u32, String> {
    if (lo..=hi).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{flag} {v} outside {lo}..={hi} for this suite"))
    }
}

fn q_lambda(s: &str) -> Polynomial {
    Polynomial::parse(s, RingDescriptor::LambdaQ).expect("literal parses")
}

fn operators(b: &mut Builder, k_max: u32) {
    let betas = beta_coefficients(k_max);
    for n in 1..=k_max {
        let r = beta_from_operator(n).map_err(|e| e.to_string()).and_then(|op| {
            let series = betas.as_ref().map_err(|e| e.to_string())?[n as usize - 1].clone();
            Ok((op == series, json!({ "operator": op.to_string(), "series": series.to_string() })))
        });
        b.try_check(format!("beta n={n}: operator coefficient equals log A(9z^2) extraction"), r);
    }
    for k in 1..=k_max {
        let r = gluing_count(k).map(|c| {
            let f = gluing_count_formula(k);
            (c == f, json!({ "count": c.to_string(), "formula": f.to_string() }))
        });
        b.try_check(format!("gluing count k={k} equals (6k)!/8^k"), r);
    }
    b.try_check(
        format!("exp-form identity for both signs, k <= {k_max}"),
        exp_form_identity(k_max).map(|h| (h, Value::Null)),
    );
    for k in 1..=k_max {
        let r = top_relation_ratio(k).map(|ratio| {
            let expected = factorial(3 * k as u64) * factorial(2 * k as u64) * pow_rational(&int(9), k as i32);
            let detail = json!({
                "ratio": ratio.as_ref().map(ToString::to_string),
                "expected": expected.to_string(),
            });
            (ratio == Some(expected), detail)
        });
        b.try_check(format!("negative gluing k={k} is a multiple of the top relation"), r);
    }
    let top = top_fz_relation(1, &Rational::one());
    let kappa1 = Polynomial::parse("kappa[1]", RingDescriptor::KappaRing).expect("literal parses");
    let c = proportionality(&top, &kappa1);
    b.check(
        "top relation k=1 is a nonzero multiple of kappa[1]",
        c.as_ref().is_some_and(|c| !c.is_zero()),
        json!(top.to_string()),
    );

    let stable = surface_family(4, 2, 3, true);
    let bad: Result<Vec<String>, _> = stable
        .iter()
        .filter_map(|s| match gluing_intertwines(s) {
            Ok(true) => None,
            Ok(false) => Some(Ok(s.to_string())),
            Err(e) => Some(Err(e)),
        })
        .collect();
    b.try_check(
        "gluing intertwines on stable surfaces",
        bad.map(|bad| (bad.is_empty(), json!({ "surfaces": stable.len(), "failures": bad }))),
    );
    let all = surface_family(4, 2, 3, false);
    let bad: Result<Vec<String>, _> = all
        .iter()
        .filter_map(|s| match gluing_and_capping_intertwine(s) {
            Ok(true) => None,
            Ok(false) => Some(Ok(s.to_string())),
            Err(e) => Some(Err(e)),
        })
        .collect();
    b.try_check(
        "gluing plus capping intertwines on all surfaces",
        bad.map(|bad| (bad.is_empty(), json!({ "surfaces": all.len(), "failures": bad }))),
    );
}

fn graphs(b: &mut Builder, max_n: u32) {
    let max_n = max_n as usize;
    for n in 0..=max_n {
        b.try_check(
            format!("class multiplicities sum to matching counts, n={n}"),
            multiplicities_reconcile(n).map(|h| (h, Value::Null)),
        );
    }
    for n in 0..=max_n.min(4) {
        let r = (|| {
            let mut seen = std::collections::BTreeMap::<MultigraphSignature, u64>::new();
            for_each_ordered_trivalent(n, &GraphFilter::any(), |g| *seen.entry(g.signature()).or_insert(0) += 1)?;
            let classes = multigraph_classes(n, &GraphFilter::any())?;
            let holds = classes.len() == seen.len()
                && classes.iter().all(|c| seen.get(&c.signature) == Some(&c.multiplicity));
            Ok::<_, crate::graphs::GraphError>((holds, json!({ "classes": classes.len() })))
        })();
        b.try_check(format!("class multiplicities match ordered enumeration, n={n}"), r);
    }
    let filter = GraphFilter::negative_only().connected();
    for n in 2..=max_n {
        let r = if n <= 4 {
            let mut count = 0u64;
            let mut failures = Vec::new();
            for_each_ordered_trivalent(n, &filter, |g| {
                count += 1;
                let v = decomposition_violations(g);
                if !v.is_empty() && failures.len() < 5 {
                    failures.push(json!({ "graph": g.encoding(), "violations": v }));
                }
            })
            .map(|_| (failures.is_empty(), json!({ "ordered_graphs": count, "failures": failures })))
        } else {
            multigraph_classes(n, &filter).map(|classes| {
                let failures: Vec<Value> = classes
                    .iter()
                    .filter_map(|c| {
                        let v = decomposition_violations(&c.representative);
                        (!v.is_empty()).then(|| json!({ "graph": c.representative.encoding(), "violations": v }))
                    })
                    .take(5)
                    .collect();
                (failures.is_empty(), json!({ "classes": classes.len(), "failures": failures }))
            })
        };
        b.try_check(format!("core decomposition invariants, connected, chi < 0, n={n}"), r);
    }
    let r = graph_sum_oracle(1).map_err(|e| e.to_string()).and_then(|oracle| {
        let op = apply_operator(&DiffOperator::surface_minus(true), &q31_power(2), 3).map_err(|e| e.to_string())?;
        Ok((oracle == op, json!(oracle.to_string())))
    });
    b.try_check("graph sum equals threefold negative surface operator on q[3,1]^2", r);
}

fn series(b: &mut Builder, order: u32) {
    for (g, k) in [(2i64, 1u32), (5, 2)] {
        let r = general_fz_relation(g, k, &[]).map(|rel| {
            let top = top_fz_relation(k, &Rational::one());
            let c = proportionality(&rel.relation, &top);
            let detail = json!({ "scalar": c.as_ref().map(ToString::to_string), "relation": rel.relation.to_string() });
            (c.is_some_and(|c| !c.is_zero()), detail)
        });
        b.try_check(format!("general and top relations agree up to scalar, g={g}"), r);
    }
    let r = general_fz_relation(2, 1, &[]).map(|rel| {
        let kappa1 = Polynomial::parse("kappa[1]", RingDescriptor::KappaRing).expect("literal parses");
        let c = proportionality(&rel.relation, &kappa1);
        (c.is_some_and(|c| !c.is_zero()), json!(rel.relation.to_string()))
    });
    b.try_check("genus 2 relation is a nonzero multiple of kappa[1]", r);
    let invalid: [(i64, u32, &[u32]); 4] = [(1, 1, &[]), (4, 1, &[]), (2, 1, &[2]), (3, 2, &[1])];
    let accepted: Vec<String> = invalid
        .iter()
        .filter(|(g, n, s)| check_fz_index(*g, *n, s).is_ok())
        .map(|t| format!("{t:?}"))
        .collect();
    b.check("invalid (g, n, sigma) triples rejected", accepted.is_empty(), json!({ "accepted": accepted }));
    let valid: [(i64, u32, &[u32]); 3] = [(2, 1, &[]), (5, 2, &[]), (4, 2, &[1])];
    let rejected: Vec<String> = valid
        .iter()
        .filter(|(g, n, s)| check_fz_index(*g, *n, s).is_err())
        .map(|t| format!("{t:?}"))
        .collect();
    b.check("valid (g, n, sigma) triples accepted", rejected.is_empty(), json!({ "rejected": rejected }));
    for n in 0..=2 {
        let r = omega_evaluation(n, order).map(|ev| {
            let one = RSeries::univariate("x", order).one_like();
            (ev == one, json!(ev.to_string()))
        });
        b.try_check(format!("master series evaluation is 1, n={n}, order {order}"), r);
    }
}

fn enumeration_suite(b: &mut Builder, order: u32) {
    for name in ClosedForm::ALL {
        let order = if name == ClosedForm::GplusC { order + 1 } else { order };
        let r = enumerated_gf(name, order).map_err(|e| e.to_string()).and_then(|e| {
            let c = closed_form_gf(name, order).map_err(|e| e.to_string())?;
            Ok((e == c, json!(c.to_string())))
        });
        b.try_check(format!("{name} closed form matches enumeration to order {order}"), r);
    }
    for n in 1..=5usize {
        let r = rooted_tree_count(n).map(|c| {
            let f = rooted_tree_formula(n as u32);
            (int(c as i64) == f, json!({ "count": c, "formula": f.to_string() }))
        });
        b.try_check(format!("rooted insertion trees, n={n}"), r);
    }
    let r = graph_master_product(order).map_err(|e| e.to_string()).and_then(|p| {
        let m = master_series(order).map_err(|e| e.to_string())?;
        Ok((p == m, Value::Null))
    });
    b.try_check(format!("four-factor graph product equals master series to order {order}"), r);
    for n in 0..=2 {
        let r = zu_evaluation(n, order).and_then(|(l, r)| {
            let mut holds = l == r;
            for v in 0..=4 {
                let (l, r) = w_evaluation(n, v, order)?;
                holds &= l == r;
            }
            Ok((holds, Value::Null))
        });
        b.try_check(format!("evaluation chain steps, n={n}"), r);
    }
    let r = omega_prime_ev(6).map(|prime| {
        let glf = RSeries::from_coeffs("x", (0..=6).map(gminus_lf_coefficient).collect());
        (prime == glf, json!(prime.to_string()))
    });
    b.try_check("derived evaluation equals leaf-free negative series", r);
}

fn diagonal_suite(b: &mut Builder, ode_order: u32) {
    let rep = match diagonal_checks(4, ode_order) {
        Ok(r) => r,
        Err(e) => {
            b.check("diagonal computations", false, json!({ "error": e.to_string() }));
            return;
        }
    };
    let json = rep.to_json();
    let rows_ok = |key: &str| json[key].as_array().is_some_and(|rows| rows.iter().all(|r| r["ok"] == json!(true)));
    for (key, label) in [
        ("rationalized", "rationalized diagonal identity, n <= 4"),
        ("raw", "diagonal identity over Q(sqrt 3), n <= 4"),
        ("bivariate", "bivariate diagonal extraction, n <= 4"),
        ("hautus_klarner", "diagonal from the algebraic parametrization, n <= 4"),
    ] {
        b.check(label, rows_ok(key), json[key].clone());
    }
    b.check(format!("ODE residual vanishes to z^{ode_order}"), rep.ode_residual_zero, Value::Null);
    b.check(
        format!("even part of the diagonal solves the ODE to z^{ode_order}"),
        rep.ode_diagonal_residual_zero,
        Value::Null,
    );
}

fn poli_vs_cminus(b: &mut Builder) {
    for input in ["q[3,1]^2", "q[3,1]^4", "q[2,0]*q[3,1]^2", "q[2,0]^2*q[3,1]^2"] {
        let f = q_lambda(input);
        b.try_check(
            format!("Polishchuk orbit matches negative surface orbit on {input}"),
            verify_poli_vs_cminus(&f).map(|h| (h, Value::Null)),
        );
    }
}

fn phi_grading(b: &mut Builder, k: u32) {
    let res = match main_theorem_pipeline(k) {
        Ok(r) => r,
        Err(e) => {
            b.check(format!("pipeline k={k}"), false, json!({ "error": e.to_string() }));
            return;
        }
    };
    let grades: serde_json::Map<String, Value> =
        res.lhs_by_phi.iter().map(|(d, p)| (d.to_string(), json!(p.to_string()))).collect();
    let positive_zero = res.lhs_by_phi.iter().all(|(d, p)| *d <= 0 || p.is_zero());
    b.check(format!("positive phi-grades vanish, k={k}"), positive_zero, Value::Object(grades));
    let zero = Polynomial::zero(res.rhs.ring());
    let grade0 = res.lhs_by_phi.get(&0).unwrap_or(&zero);
    b.check(
        format!("phi-grade 0 equals the negative gluing orbit, k={k}"),
        grade0 == &res.rhs,
        json!({ "grade0": grade0.to_string(), "rhs": res.rhs.to_string() }),
    );
    b.check(format!("all nonzero phi-grades vanish, k={k}"), res.holds(), Value::Null);
    let ratio = res.fz_ratio();
    b.check(
        format!("right-hand side is a nonzero multiple of the top relation, k={k}"),
        ratio.as_ref().is_some_and(|c| !c.is_zero()),
        json!({ "ratio": ratio.map(|c| c.to_string()) }),
    );
}
