//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
//! status if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use microloc::cli::{parse_and_validate, run_study, verdicts, Verdict};
use microloc::dispersion::DispersionModel;
use microloc::exec::{set_mode, ExecMode};
use microloc::field::{synthesize_data, FieldState, GridSpec, SpectralProfile};
use microloc::limits::g_chi_radial;
use microloc::propagator::evolve;
use microloc::quantize::{eval_symbol, wigner_transform, CutoffProfile, CutoffSpec, Quantizer, SymbolSpec, SymbolVariant};
use microloc::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const HALF_KG: &str = "--set schedule.count=11 --set data.shape.inner=0.25 --set data.shape.outer=0.75 --set grid.margin=1.4";
const KG_WINDOW: &str = "--set schedule.count=11 --set data.shape.inner=0.2 --set data.shape.outer=1.5";
const RUNTIME_BUDGET: Duration = Duration::from_secs(600);

type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

struct Outcome {
    pass: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { pass: true, details: Vec::new() }
    }

    fn check(&mut self, label: impl Into<String>, pass: bool) {
        let label = label.into();
        self.details.push(format!("{label} {}", if pass { "ok" } else { "FAILED" }));
        self.pass &= pass;
    }

    fn absorb(&mut self, v: &[Verdict]) {
        for x in v {
            self.check(format!("{}: {}", x.label, x.detail), x.pass);
        }
    }
}

/// Run one command line through the same path as the binary, minus files.
fn study(out: &mut Outcome, line: &str) -> Duration {
    let argv: Vec<String> = std::iter::once("microloc".to_string()).chain(line.split_whitespace().map(String::from)).collect();
    let started = Instant::now();
    match parse_and_validate(argv) {
        Ok(run) => match run_study(run.study, &run.experiment) {
            Ok(report) => out.absorb(&verdicts(run.study, &run.experiment, &report)),
            Err(e) => out.check(format!("`{line}` failed: {e}"), false),
        },
        Err(e) => out.check(format!("`{line}` rejected (exit {}): {}", e.code, e.message.trim()), false),
    }
    started.elapsed()
}

fn studies(lines: &[&str]) -> Outcome {
    let mut out = Outcome::new();
    for line in lines {
        study(&mut out, line);
    }
    out
}

fn supercritical_quarter() -> Outcome {
    let mut out = Outcome::new();
    for model in ["schrodinger", "capillary-ww"] {
        let took = study(&mut out, &format!("converge --model {model} --delta 0.25"));
        out.check(format!("{model} runtime {:.1}s", took.as_secs_f64()), took <= RUNTIME_BUDGET);
    }
    out
}

fn max_dev(a: &FieldState, b: &FieldState) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn exactness() -> Outcome {
    let mut out = Outcome::new();
    let g = GridSpec::new(1, 1024, 80.0).unwrap();
    let (u0, _) = synthesize_data(&SpectralProfile::annulus(1.0, 2.0, 1.0), &g).unwrap();
    let plancherel = (u0.norm_sq() - u0.norm_sq_physical()).abs();
    out.check(format!("Plancherel {plancherel:.1e}"), plancherel <= 1e-12);

    let mut worst_unitary = 0.0_f64;
    let mut worst_group = 0.0_f64;
    for model in [DispersionModel::schrodinger(), DispersionModel::capillary_ww(), DispersionModel::half_klein_gordon()] {
        let a = evolve(&model, &u0, 3.7).unwrap();
        worst_unitary = worst_unitary.max((a.norm_sq().sqrt() - u0.norm_sq().sqrt()).abs());
        let b = evolve(&model, &evolve(&model, &u0, 1.2).unwrap(), 2.5).unwrap();
        worst_group = worst_group.max(max_dev(&a, &b));
    }
    out.check(format!("unitarity {worst_unitary:.1e}"), worst_unitary <= 1e-12);
    out.check(format!("group law {worst_group:.1e}"), worst_group <= 1e-12);

    let small = GridSpec::new(1, 64, 10.0).unwrap();
    let v = FieldState::from_fn(small, |x| C64::from_polar((-x[0] * x[0] / 8.0).exp(), 1.3 * x[0]));
    let w = FieldState::from_fn(small, |x| C64::new((-(x[0] - 1.0).powi(2) / 4.0).exp(), 0.2 * x[0]));
    let spec = SymbolSpec::new(
        SymbolVariant::Plain,
        DispersionModel::schrodinger(),
        CutoffSpec { chi: CutoffProfile::Bump { radius: 1.0 }, delta: 0.1, ..CutoffSpec::default() },
    );
    let t = 2.0;
    let q = Quantizer::new(&spec, t, small).unwrap();
    let fast = q.apply(&v).unwrap();
    let mut oracle = 0.0_f64;
    for j in 0..small.n() {
        let x = small.coord(j);
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..small.n() {
            let xi = small.freq(k);
            let a = eval_symbol(&spec, t, [x, 0.0], [xi, 0.0]).unwrap();
            acc += C64::new((x * xi).cos(), (x * xi).sin()) * a * v.coeffs()[k];
        }
        oracle = oracle.max((fast.values()[j] - acc * (small.dxi() / (2.0 * PI))).norm());
    }
    out.check(format!("dense-matrix oracle {oracle:.1e}"), oracle <= 1e-10);

    let lhs = fast.inner(&w);
    let rhs = v.inner(&q.adjoint(&w).unwrap());
    let adjoint = (lhs - rhs).norm();
    out.check(format!("adjoint identity {adjoint:.1e}"), adjoint <= 1e-10);

    let wig = wigner_transform(&v, &v).unwrap();
    let mut marginal = 0.0_f64;
    for j in 0..small.n() {
        let m: f64 = (0..small.n()).map(|i| wig.at(j, i).re).sum::<f64>() * small.dxi();
        marginal = marginal.max((m - (2.0 * PI).sqrt() * v.values()[j].norm_sqr()).abs());
    }
    out.check(format!("Wigner marginal {marginal:.1e}"), marginal <= 1e-8);
    out
}

fn positivity() -> Outcome {
    let mut out = Outcome::new();
    let cutoff = CutoffSpec { chi: CutoffProfile::Gaussian { width: 1.0 }, ..CutoffSpec::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for p in [-0.5, 0.5] {
        let model = DispersionModel::fractional(p).unwrap();
        let least = (0..50)
            .map(|_| {
                let rho = 10f64.powf(rng.random_range(-2.0..2.0));
                g_chi_radial(&model, &cutoff, rho, 1).map(|g| g.value).unwrap_or(f64::NAN)
            })
            .fold(f64::INFINITY, f64::min);
        out.check(format!("p = {p}: min G over 50 radii {least:.3e}"), least > 1e-10);
    }
    let spread = |p: f64, rng: &mut ChaCha8Rng| -> f64 {
        let model = DispersionModel::fractional(p).unwrap();
        let logs: Vec<f64> = (0..20)
            .map(|_| g_chi_radial(&model, &cutoff, 10f64.powf(rng.random_range(-1.0..1.0)), 1).unwrap().value.ln())
            .collect();
        let mean = logs.iter().sum::<f64>() / logs.len() as f64;
        logs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / logs.len() as f64
    };
    let flat = spread(1.0, &mut rng);
    let varying = spread(1.5, &mut rng);
    out.check(format!("variance of log G: p = 1 {flat:.1e}, p = 1.5 {varying:.1e}"), flat < 1e-16 && varying > 1e-3);
    out
}

fn main() {
    set_mode(ExecMode::Parallel);
    let alternative = format!(
        "converge --model half-kg --variant alternative --delta 1.25 --set cutoff.weight.kind=power-law \
         --set cutoff.weight.low=1 --set cutoff.weight.high=-2 --set cutoff.weight.scale=1 {HALF_KG}"
    );
    let criteria: Vec<Criterion> = vec![
        ("supercritical quarter energy", Box::new(supercritical_quarter)),
        (
            "subcritical vanishing",
            Box::new(|| studies(&["converge --model schrodinger --delta -0.25", "converge --model capillary-ww --delta -0.25"])),
        ),
        ("critical limit, convex", Box::new(|| studies(&["converge --model schrodinger --delta 0", "gchi --delta 0"]))),
        (
            "critical limit, concave",
            Box::new(|| studies(&["converge --model gravity-ww --delta 0", "gchi --model gravity-ww --delta 0"])),
        ),
        (
            "half Klein-Gordon, modified symbol",
            Box::new(|| studies(&[&format!("converge --model half-kg --variant modified --delta 0.25 {HALF_KG}")])),
        ),
        ("half Klein-Gordon, alternative symbol", Box::new(move || studies(&[&alternative]))),
        ("Klein-Gordon microlocal energy", Box::new(|| studies(&[&format!("kg-micro {HALF_KG}")]))),
        (
            "Klein-Gordon classical partition",
            Box::new(|| {
                studies(&[
                    &format!("kg-classical {KG_WINDOW}"),
                    &format!("kg-classical {KG_WINDOW} --set kg.r0=1.0 --set kg.r1=null"),
                ])
            }),
        ),
        (
            "uniform operator norms",
            Box::new(|| {
                studies(&[
                    "opnorm --variant indicator-only",
                    "opnorm --model half-kg --variant kg-indicator --set opnorm.t_from=16",
                ])
            }),
        ),
        ("L1 operator bound", Box::new(|| studies(&["opnorm --variant plain --delta -0.25 --set opnorm.n=2048"]))),
        (
            "dispersive decay",
            Box::new(|| {
                studies(&[
                    &format!("dispersion-decay --model half-kg {HALF_KG}"),
                    "dispersion-decay --model schrodinger",
                    "dispersion-decay --model schrodinger --dim 2 --set grid.n_cap=2048 --set schedule.count=6 \
                     --set data.shape.inner=0.5 --set data.shape.outer=1.5",
                ])
            }),
        ),
        (
            "asymptotic profile",
            Box::new(|| {
                studies(&[
                    "profile",
                    "profile --set profile.g.kind=gaussian --set profile.g.center=[-3,0] --set profile.g.width=0.5",
                ])
            }),
        ),
        ("stationary phase remainder", Box::new(|| studies(&["statphase --dim 2"]))),
        ("exactness suite", Box::new(exactness)),
        ("positivity of the critical density", Box::new(positivity)),
    ];

    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = run();
        for d in &outcome.details {
            println!("    {d}");
        }
        println!(
            "criterion {:>2} {title}: {} ({:.1}s)",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
        if !outcome.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
