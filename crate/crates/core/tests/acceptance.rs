//! Acceptance gate: one line per criterion, nonzero exit if any fails.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;

use detflux::cli::runner::random_points;
use detflux::cli::{prepare_suite, run_prepared, CheckKind, Overrides, Prepared, Registry, Status, PAPER_CORE};
use detflux::geometry::{bump_field, linear, sum, Domain, DomainKind};
use detflux::identities::{
    cauchy_binet_check, integral_flux, integral_form, integral_triple, integral_volume,
    krylov_leading_coefficient_check, kulpa_telescope, no_retraction_demo, piola_divergence_fd,
    piola_divergence_residual, product_rule_residual, theorem1_check, Rules, Verdict, FD_STEP,
};
use detflux::quadrature::{default_order, surface_integral, volume_integral};

use common::{atlas_domains, has_bump, leibniz_det, test_matrix, unit_ball_volume, zoo};

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(pass: bool, summary: impl Into<String>) -> Outcome {
    Outcome { pass, summary: summary.into() }
}

fn max(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn suite() -> Vec<Prepared> {
    prepare_suite(PAPER_CORE, &Registry::with_builtins(), &Overrides::default()).expect("built-in suite validates")
}

fn rules_for(p: &Prepared) -> Rules {
    Rules::new(p.domain.dim(), p.order).unwrap()
}

fn pairs(suite: &[Prepared]) -> impl Iterator<Item = &Prepared> {
    suite.iter().filter(|p| p.scenario.checks.contains(&CheckKind::Theorem1))
}

fn identity_volume() -> Outcome {
    let mut worst = 0.0_f64;
    for n in [2, 3] {
        let d = Domain::unit_ball(n).unwrap();
        let rules = Rules::new(n, default_order(n, false)).unwrap();
        let t = integral_triple(&detflux::geometry::identity(n).unwrap(), &d, &rules.volume, &rules.surface).unwrap();
        let exact = if n == 2 { PI } else { 4.0 * PI / 3.0 };
        worst = worst.max(max(t.values().iter().map(|v| (v - exact).abs())));
    }
    outcome(worst <= 1e-8, format!("identity on disk and ball: max |I - Vol| = {worst:.2e} (tol 1e-8)"))
}

fn linear_plus_bump() -> Outcome {
    let mut worst = 0.0_f64;
    let mut cases = 0;
    for (d, seed) in [
        (Domain::unit_box(2).unwrap(), 21),
        (Domain::unit_box(3).unwrap(), 22),
        (Domain::unit_ball(2).unwrap(), 23),
        (Domain::unit_ball(3).unwrap(), 24),
    ] {
        let n = d.dim();
        let a = test_matrix(n, seed, 1.2);
        let amp: Vec<f64> = (0..n).map(|i| 0.1 - 0.07 * i as f64).collect();
        let radius = if d.kind() == DomainKind::Box { 0.45 } else { 0.8 };
        let f =
            sum(vec![linear(n, a.clone()).unwrap(), bump_field(d.center().to_vec(), radius, amp).unwrap()]).unwrap();
        let rules = Rules::new(n, default_order(n, true)).unwrap();
        let got = integral_volume(&f, &d, &rules.volume).unwrap();
        let vol = if d.kind() == DomainKind::Box { 1.0 } else { unit_ball_volume(n) };
        worst = worst.max((got - leibniz_det(n, &a) * vol).abs());
        cases += 1;
    }
    outcome(worst <= 1e-6, format!("Ax + bump on {cases} domains: max |I - det(A) Vol| = {worst:.2e} (tol 1e-6)"))
}

fn theorem1(suite: &[Prepared]) -> Outcome {
    let mut equal = 0;
    let mut controls = 0;
    let mut worst = 0.0_f64;
    let mut ok = true;
    let mut kinds = std::collections::BTreeSet::new();
    for p in pairs(suite) {
        let rules = rules_for(p);
        let c = theorem1_check(&p.scenario.id, &p.plus, p.minus.as_ref().unwrap(), &p.domain, &rules, p.tolerances)
            .unwrap();
        if p.scenario.expect.is_some() {
            controls += 1;
            ok &= c.verdict == Verdict::HypothesisViolation;
        } else {
            equal += 1;
            kinds.insert((p.domain.dim(), p.domain.kind() == DomainKind::Ball));
            worst = worst.max(c.discrepancy);
            ok &= c.verdict == Verdict::Pass && c.discrepancy <= 1e-6;
        }
    }
    let coverage = [(2, true), (2, false), (3, true), (3, false)].iter().all(|k| kinds.contains(k));
    outcome(
        ok && equal >= 6 && controls >= 2 && coverage,
        format!(
            "{equal} boundary-equal pairs, max |I+ - I-| = {worst:.2e} (tol 1e-6); {controls} controls flagged hypothesis-violation"
        ),
    )
}

fn random_sample_domains() -> Vec<Domain> {
    vec![
        Domain::unit_ball(2).unwrap(),
        Domain::unit_ball(3).unwrap(),
        Domain::unit_box(4).unwrap(),
        Domain::ellipse(2.0, 0.5).unwrap(),
    ]
}

fn piola() -> Outcome {
    let (mut div, mut fd_gap, mut maps) = (0.0_f64, 0.0_f64, 0);
    for (k, d) in random_sample_domains().iter().enumerate() {
        let pts = random_points(d, 1000, 100 + k as u64).unwrap();
        for f in zoo(d) {
            maps += 1;
            for x in &pts {
                let jet = piola_divergence_residual(&f, x).unwrap();
                let fd = piola_divergence_fd(&f, x, FD_STEP).unwrap();
                div = div.max(jet.abs());
                fd_gap = fd_gap.max((jet - fd).abs());
            }
        }
    }
    outcome(
        div <= 1e-11 && fd_gap <= 1e-5,
        format!("{maps} maps x 1000 points: max |div A| = {div:.2e} (tol 1e-11), jet vs FD {fd_gap:.2e} (tol 1e-5)"),
    )
}

fn product_rule() -> Outcome {
    let mut worst = 0.0_f64;
    let mut maps = 0;
    for (k, d) in random_sample_domains().iter().enumerate() {
        let pts = random_points(d, 1000, 200 + k as u64).unwrap();
        for f in zoo(d) {
            maps += 1;
            worst = worst.max(max(pts.iter().map(|x| product_rule_residual(&f, x).unwrap().relative_residual)));
        }
    }
    outcome(worst <= 1e-12, format!("{maps} maps x 1000 points: max relative residual {worst:.2e} (tol 1e-12)"))
}

fn cauchy_binet() -> Outcome {
    let (mut gap, mut flux_form, mut nodes) = (0.0_f64, 0.0_f64, 0usize);
    for d in atlas_domains() {
        let n = d.dim();
        for f in zoo(&d) {
            let rules = Rules::new(n, default_order(n, has_bump(&f))).unwrap();
            let mut v = vec![0.0; n - 1];
            for chart in d.boundary_atlas() {
                for k in 0..rules.surface.len() {
                    rules.surface.node(k, &mut v);
                    gap = gap.max(cauchy_binet_check(&f, chart, &chart.to_rectangle(&v)).unwrap().gap());
                    nodes += 1;
                }
            }
            let flux = integral_flux(&f, &d, &rules.surface).unwrap();
            let form = integral_form(&f, &d, &rules.surface).unwrap();
            flux_form = flux_form.max((flux - form).abs());
        }
    }
    outcome(
        gap <= 1e-11 && flux_form <= 1e-10,
        format!("{nodes} boundary nodes: max |A.N - det| = {gap:.2e} (tol 1e-11), |flux - form| = {flux_form:.2e} (tol 1e-10)"),
    )
}

fn form_vs_volume(suite: &[Prepared]) -> Outcome {
    let (mut poly, mut bump, mut ok) = (0.0_f64, 0.0_f64, true);
    for p in suite.iter().filter(|p| p.domain.has_atlas()) {
        let rules = rules_for(p);
        for f in std::iter::once(&p.plus).chain(p.minus.as_ref()) {
            let gap = (integral_form(f, &p.domain, &rules.surface).unwrap()
                - integral_volume(f, &p.domain, &rules.volume).unwrap())
            .abs();
            if has_bump(f) {
                bump = bump.max(gap);
                ok &= gap <= 1e-6;
            } else {
                poly = poly.max(gap);
                ok &= gap <= 1e-8;
            }
        }
    }
    outcome(
        ok,
        format!("suite maps: |form - volume| {poly:.2e} without bump (tol 1e-8), {bump:.2e} with bump (tol 1e-6)"),
    )
}

fn kulpa(suite: &[Prepared]) -> Outcome {
    let (mut step, mut telescope, mut ok, mut count) = (0.0_f64, 0.0_f64, true, 0);
    for p in pairs(suite).filter(|p| p.scenario.expect.is_none()) {
        let rules = rules_for(p);
        let minus = p.minus.as_ref().unwrap();
        let chain = kulpa_telescope(&p.plus, minus, &p.domain, &rules).unwrap();
        let direct = integral_volume(&p.plus, &p.domain, &rules.volume).unwrap()
            - integral_volume(minus, &p.domain, &rules.volume).unwrap();
        let n = p.domain.dim() as f64;
        let t = (chain.total_change() - direct).abs();
        step = step.max(chain.max_step_discrepancy());
        telescope = telescope.max(t);
        ok &= chain.max_step_discrepancy() <= 1e-8 && t <= n * 1e-8 && chain.total_change().abs() <= n * 1e-8;
        count += 1;
    }
    outcome(
        ok,
        format!("{count} pairs: max single-step change {step:.2e} (tol 1e-8), telescoped vs direct {telescope:.2e}"),
    )
}

fn krylov(suite: &[Prepared]) -> Outcome {
    let (mut worst, mut ok, mut count) = (0.0_f64, true, 0);
    for p in pairs(suite) {
        let rules = rules_for(p);
        let c = krylov_leading_coefficient_check(&p.plus, p.minus.as_ref().unwrap(), &p.domain, &rules).unwrap();
        let own = (c.plus.leading() - c.volume_plus).abs().max((c.minus.leading() - c.volume_minus).abs());
        let d = if p.scenario.expect.is_some() { own } else { c.discrepancy() };
        worst = worst.max(d);
        ok &= d <= 1e-8;
        count += 1;
    }
    outcome(ok, format!("{count} theorem scenarios: max leading-coefficient discrepancy {worst:.2e} (tol 1e-8)"))
}

fn no_retraction() -> Outcome {
    let (mut det, mut ok, mut samples) = (0.0_f64, true, usize::MAX);
    for n in [2, 3] {
        let d = Domain::unit_ball(n).unwrap();
        let r = no_retraction_demo(&d, &Rules::new(n, default_order(n, true)).unwrap()).unwrap();
        det = det.max(max(r.obstruction.iter().map(|o| o.max_abs_det)));
        samples = samples.min(r.obstruction.iter().map(|o| o.samples).min().unwrap());
        ok &= r.holds() && r.obstruction.len() >= 2;
    }
    outcome(
        ok && samples >= 10_000 && det <= 1e-10,
        format!("sphere-valued maps on >= {samples} points: max |det f'| = {det:.2e} (tol 1e-10); boundary-identity integrals = Vol(B)"),
    )
}

/// `|I(8) - I(4)| >= |I(16) - I(8)|` once differences exceed a roundoff floor.
fn monotone(values: &[f64]) -> bool {
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    diffs.windows(2).all(|w| w[1] <= w[0] || w[1] <= 1e-12)
}

fn quadrature_sanity(suite: &[Prepared]) -> Outcome {
    let measure = |d: &Domain| -> (f64, f64) {
        let n = d.dim();
        let rules = Rules::new(n, default_order(n, false)).unwrap();
        let vol = volume_integral(|_| Ok(1.0), d, &rules.volume).unwrap();
        let area =
            surface_integral(|_, nn| Ok(nn.iter().map(|c| c * c).sum::<f64>().sqrt()), d, &rules.surface).unwrap();
        (vol, area)
    };
    let closed = [
        (Domain::unit_ball(2).unwrap(), PI, 2.0 * PI),
        (Domain::unit_ball(3).unwrap(), 4.0 * PI / 3.0, 4.0 * PI),
        (Domain::unit_ball(4).unwrap(), PI * PI / 2.0, 2.0 * PI * PI),
        (Domain::unit_box(2).unwrap(), 1.0, 4.0),
        (Domain::unit_box(3).unwrap(), 1.0, 6.0),
        (Domain::unit_box(4).unwrap(), 1.0, 8.0),
    ];
    let mut worst = 0.0_f64;
    for (d, vol, area) in &closed {
        let (v, a) = measure(d);
        worst = worst.max((v - vol).abs()).max((a - area).abs());
    }
    let e = Domain::ellipse(2.0, 0.5).unwrap();
    worst = worst.max((measure(&e).0 - PI).abs());

    let mut monotone_ok = true;
    for p in suite {
        let mut values = Vec::new();
        for order in [4, 8, 16, 32] {
            let rules = Rules::new(p.domain.dim(), order).unwrap();
            values.push(integral_volume(&p.plus, &p.domain, &rules.volume).unwrap());
        }
        monotone_ok &= monotone(&values);
    }
    outcome(
        worst <= 1e-7 && monotone_ok,
        format!("closed-form areas and volumes: max error {worst:.2e} (tol 1e-7); refinement monotone over 4->8->16->32: {monotone_ok}"),
    )
}

fn main() -> ExitCode {
    let suite = suite();
    let reports = run_prepared(&suite);
    let suite_ok = reports.iter().all(|r| r.status == Status::Pass);
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("identity volume", Box::new(identity_volume)),
        ("Ax + bump volume", Box::new(linear_plus_bump)),
        (
            "boundary-equal pairs",
            Box::new(|| {
                let o = theorem1(&suite);
                outcome(o.pass && suite_ok, format!("{}; suite status all pass: {suite_ok}", o.summary))
            }),
        ),
        ("Piola identity", Box::new(piola)),
        ("cofactor product rule", Box::new(product_rule)),
        ("Cauchy-Binet on charts", Box::new(cauchy_binet)),
        ("form vs volume", Box::new(|| form_vs_volume(&suite))),
        ("column replacement", Box::new(|| kulpa(&suite))),
        ("det(I + tf') coefficients", Box::new(|| krylov(&suite))),
        ("no-retraction obstruction", Box::new(no_retraction)),
        ("quadrature sanity", Box::new(|| quadrature_sanity(&suite))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += usize::from(!o.pass);
        println!("[{}] {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.summary);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
