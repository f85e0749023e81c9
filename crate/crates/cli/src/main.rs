//! `hyperreal` command-line tool. Reports are JSON on stdout (or `--out`);
//! exit status is 0 when the verdict holds, 1 when it does not, and 2 on
//! malformed input.

mod input;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperreal::circuits::{analyze, netlist, synthesize, RlcDegreeOne};
use hyperreal::classify::{classify_prs, eta_of, ClassifyOptions};
use hyperreal::kyp::{search_h, verify};
use hyperreal::matcore::{cayley, HermitianMatrix};
use hyperreal::rational::Realization;
use hyperreal::sets::{
    is_lyap_member, is_lyap_member_closure, is_stein_member, is_stein_member_closure, lyap_residual,
    product_contract_eta, random_stein_member, stein_residual, LyapSetSpec, SteinSetSpec,
};
use hyperreal::stability::{
    circle_transform_eta, criterion, simulate_difference_inclusion, simulate_lurie, time_constant, CriterionRoute,
    DifferenceInclusion, LurieLoop, Nonlinearity, Sector,
};
use hyperreal::Error;
use input::{InputError, Parsed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "hyperreal", version, about = "Hyper-positive real analysis of rational matrix functions")]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SystemArgs {
    /// Realization JSON file.
    #[arg(long)]
    realization: Option<String>,
    /// Inline SISO function `{"num":[c0,..],"den":[c0,..]}`, ascending powers.
    #[arg(long)]
    siso: Option<String>,
}

impl SystemArgs {
    fn load(&self) -> Parsed<Realization> {
        input::system(self.realization.as_deref(), self.siso.as_deref())
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Class {
    P,
    Sp,
    Hp,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetKind {
    Stein,
    Lyap,
}

#[derive(Subcommand)]
enum Command {
    /// Positive real, strictly positive real and hyper-positive verdicts.
    Classify {
        #[command(flatten)]
        system: SystemArgs,
        /// Class that decides the exit status.
        #[arg(long, value_enum, default_value = "hp")]
        class: Class,
    },
    /// Sharpest eta with a frequency witness.
    Eta {
        #[command(flatten)]
        system: SystemArgs,
        /// Also test membership at this eta.
        #[arg(long)]
        eta: Option<String>,
    },
    /// Check a given certificate H.
    KypVerify {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long = "H")]
        h: String,
        #[arg(long, default_value = "inf")]
        eta: String,
    },
    /// Search a certificate H by the Riccati route.
    KypSearch {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value = "inf")]
        eta: String,
    },
    /// Cayley transform of a realization.
    Cayley {
        #[command(flatten)]
        system: SystemArgs,
    },
    /// Circle criterion for the sector [k, K], with an optional plant.
    Circle {
        #[arg(long)]
        k: String,
        #[arg(long = "K")]
        big_k: String,
        /// SISO plant `{"num":[..],"den":[..]}`.
        #[arg(long)]
        plant: Option<String>,
    },
    /// Simulate a Lurie loop.
    Simulate {
        /// SISO plant `{"num":[..],"den":[..]}`.
        #[arg(long)]
        plant: String,
        #[arg(long)]
        k: String,
        #[arg(long = "K")]
        big_k: String,
        /// linear:GAIN, saturation:LEVEL, deadzone:WIDTH, tanh:SCALE or time-varying:OMEGA.
        #[arg(long, default_value = "saturation:1")]
        nonlinearity: String,
        /// Initial state as a JSON array (default all ones).
        #[arg(long)]
        x0: Option<String>,
        /// Horizon; 50 time constants when omitted.
        #[arg(long)]
        t_end: Option<String>,
        #[arg(long)]
        dt: Option<String>,
        /// Trajectory CSV output.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 2000)]
        max_rows: usize,
    },
    /// Iterate x(k+1) = A(k) x(k) with A(k) drawn from Stein_I(eta).
    DiSimulate {
        #[arg(long)]
        eta: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        x0: Option<String>,
        /// Per-step norms as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Degree-one RC impedance: synthesize from (eta, a) or analyze (R, C, Rs).
    Rlc {
        #[arg(long)]
        eta: Option<String>,
        #[arg(long)]
        a: Option<String>,
        #[arg(long = "R")]
        r: Option<String>,
        #[arg(long = "C")]
        c: Option<String>,
        #[arg(long = "Rs")]
        rs: Option<String>,
        /// Netlist output file.
        #[arg(long)]
        netlist: Option<PathBuf>,
    },
    /// Frequency response as CSV (omega, re, im) and optional SVG.
    Nyquist {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Draw the reference circles for this eta.
        #[arg(long)]
        eta: Option<String>,
        #[arg(long, default_value_t = 400)]
        points: usize,
        #[arg(long, default_value = "1e-3")]
        omega_min: String,
        #[arg(long, default_value = "1e3")]
        omega_max: String,
    },
    /// Membership in Stein_H(eta) or L_H(eta), or a randomized consistency run.
    SetsCheck {
        #[arg(long, value_enum, default_value = "stein")]
        set: SetKind,
        #[arg(long = "H")]
        h: String,
        #[arg(long)]
        eta: String,
        /// Matrix to test; without it a seeded random run is performed.
        #[arg(long = "A")]
        a: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

enum Failure {
    Input(InputError),
    /// Verdict false, with the report to print.
    Negative(Value),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::Input(e)
    }
}

type Run = std::result::Result<(Value, bool), Failure>;

/// Library errors: negative verdicts become exit 1, the rest exit 2 with
/// the field that produced them.
fn lib<T>(field: &str, r: hyperreal::Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(|e| match e {
        Error::NoCertificate { eta, eta_star, gap } => Failure::Negative(json!({
            "verdict": false,
            "error": "NoCertificate",
            "eta": eta,
            "eta_star": finite_or_null(eta_star),
            "gap": finite_or_null(gap),
            "message": e.to_string(),
        })),
        Error::UnstablePoles(_)
        | Error::InnerNotSP
        | Error::HamiltonianImaginaryAxisEigenvalues(_)
        | Error::Numeric(_) => {
            Failure::Negative(json!({ "verdict": false, "error": kind(&e), "message": e.to_string() }))
        }
        other => Failure::Input(InputError::new(field, other.to_string())),
    })
}

fn kind(e: &Error) -> &'static str {
    match e {
        Error::UnstablePoles(_) => "UnstablePoles",
        Error::InnerNotSP => "InnerNotSP",
        Error::HamiltonianImaginaryAxisEigenvalues(_) => "HamiltonianImaginaryAxisEigenvalues",
        Error::Numeric(_) => "NumericalFailure",
        _ => "Error",
    }
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!("inf")
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn write_file(field: &str, path: &PathBuf, text: &str) -> Parsed<()> {
    std::fs::write(path, text).map_err(|e| InputError::new(field, format!("cannot write `{}`: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = input::tolerances(std::env::var("HYPERREAL_TOL").ok().as_deref())
        .map_err(Failure::Input)
        .and_then(|tol| {
            let opts = ClassifyOptions { tol, ..Default::default() };
            run(&cli.command, &opts)
        });
    let (report, ok) = match outcome {
        Ok(r) => r,
        Err(Failure::Negative(v)) => (v, false),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if !report.is_null() {
        let text = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
        match &cli.out {
            Some(path) => {
                if let Err(e) = write_file("--out", path, &text) {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            None => print!("{text}"),
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cmd: &Command, opts: &ClassifyOptions) -> Run {
    match cmd {
        Command::Classify { system, class } => {
            let r = system.load()?;
            let v = lib("--realization", classify_prs(&r, opts))?;
            let ok = match class {
                Class::P => v.p,
                Class::Sp => v.sp,
                Class::Hp => v.hp,
            };
            Ok((to_value(&v), ok))
        }
        Command::Eta { system, eta } => {
            let r = system.load()?;
            let rep = lib("--realization", eta_of(&r, opts))?;
            let mut out = to_value(&rep);
            let ok = match eta {
                Some(text) => {
                    let e = input::eta("--eta", text)?;
                    let admits = rep.admits(e, opts.gamma_tol);
                    out["eta"] = to_value(&e);
                    out["admits"] = json!(admits);
                    admits
                }
                None => rep.is_hyper_positive(),
            };
            Ok((out, ok))
        }
        Command::KypVerify { system, h, eta } => {
            let r = system.load()?;
            let eta = input::eta("--eta", eta)?;
            let h = HermitianMatrix::new_strict(input::matrix("--H", h)?, opts.tol.herm)
                .map_err(|e| InputError::new("--H", e.to_string()))?;
            let cert = lib("--H", verify(&r, &h, eta, &opts.tol))?;
            Ok((to_value(&cert), cert.verdict.certifies()))
        }
        Command::KypSearch { system, eta } => {
            let r = system.load()?;
            let eta = input::eta("--eta", eta)?;
            let cert = lib("--realization", search_h(&r, eta, opts))?;
            Ok((to_value(&cert), cert.verdict.certifies()))
        }
        Command::Cayley { system } => {
            let r = system.load()?;
            let c = lib("--realization", r.cayley())?;
            Ok((to_value(&c), true))
        }
        Command::Circle { k, big_k, plant } => circle(k, big_k, plant.as_deref(), opts),
        Command::Simulate {
            plant,
            k,
            big_k,
            nonlinearity,
            x0,
            t_end,
            dt,
            csv,
            max_rows,
        } => {
            let plant = input::json("--plant", plant)?;
            let sector = lib("--k", Sector::new(input::finite_number("--k", k)?, input::finite_number("--K", big_k)?))?;
            let nl = parse_nonlinearity(nonlinearity)?;
            let lp = lib("--nonlinearity", LurieLoop::new(plant, sector, nl))?;
            let n = lp.plant.degree();
            let x0 = match x0 {
                Some(text) => input::real_vector("--x0", text)?,
                None => vec![1.0; n],
            };
            if x0.len() != n {
                return Err(InputError::new("--x0", format!("expected {n} entries, got {}", x0.len())).into());
            }
            let tau = lib("--plant", time_constant(&lp))?;
            let t_end = match t_end {
                Some(t) => input::finite_number("--t-end", t)?,
                None => 50.0 * tau.ok_or_else(|| InputError::new("--t-end", "a loop at k or K is unstable; give --t-end"))?,
            };
            let dt = dt.as_deref().map(|d| input::finite_number("--dt", d)).transpose()?;
            let tr = lib("--dt", simulate_lurie(&lp, &x0, t_end, dt, *max_rows))?;
            if let Some(path) = csv {
                write_file("--csv", path, &tr.to_csv())?;
            }
            let crit = lib("--plant", criterion(&lp.plant, &sector, CriterionRoute::Classical, opts))?;
            let n0 = x0.iter().map(|v| v * v).sum::<f64>().sqrt();
            let decayed = !tr.diverged && tr.final_norm <= 1e-3 * n0;
            Ok((
                json!({
                    "t_end": t_end,
                    "dt": tr.dt,
                    "time_constant": tau,
                    "initial_norm": n0,
                    "sup_norm": tr.sup_norm,
                    "final_norm": tr.final_norm,
                    "decay_rate": tr.decay_rate,
                    "diverged": tr.diverged,
                    "decayed": decayed,
                    "criterion_holds": crit.criterion_holds,
                    "evidence": "corroboration",
                }),
                decayed,
            ))
        }
        Command::DiSimulate { eta, n, steps, seed, x0, csv } => {
            let eta = input::eta("--eta", eta)?;
            let di = lib("--eta", DifferenceInclusion::new(eta, *n))?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let x0 = match x0 {
                Some(text) => input::real_vector("--x0", text)?,
                None => (0..*n).map(|_| rng.random_range(-1.0..1.0)).collect(),
            };
            let tr = lib("--x0", simulate_difference_inclusion(&di, &x0, *steps, &mut rng))?;
            if let Some(path) = csv {
                let gamma = eta.contraction_radius();
                let mut text = String::from("k,norm,bound\n");
                for (k, v) in tr.norms.iter().enumerate() {
                    text.push_str(&format!("{k},{v:e},{:e}\n", tr.norms[0] * gamma.powi(k as i32)));
                }
                write_file("--csv", path, &text)?;
            }
            let ok = tr.violations == 0;
            Ok((
                json!({
                    "eta": eta,
                    "n": n,
                    "steps": steps,
                    "seed": seed,
                    "violations": tr.violations,
                    "nonmembers": tr.nonmembers,
                    "worst_ratio": tr.worst_ratio,
                    "final_norm": tr.norms.last(),
                }),
                ok,
            ))
        }
        Command::Rlc { eta, a, r, c, rs, netlist: path } => {
            let circuit = match (eta, a, r, c, rs) {
                (Some(eta), Some(a), None, None, None) => {
                    let e = input::eta("--eta", eta)?;
                    lib("--eta", synthesize(e, input::finite_number("--a", a)?))?
                }
                (None, None, Some(r), Some(c), Some(rs)) => lib(
                    "--Rs",
                    RlcDegreeOne::new(
                        input::finite_number("--R", r)?,
                        input::finite_number("--C", c)?,
                        input::finite_number("--Rs", rs)?,
                    ),
                )?,
                _ => return Err(InputError::new("--eta", "give either --eta and --a, or --R, --C and --Rs").into()),
            };
            let an = lib("--R", analyze(&circuit))?;
            let text = netlist(&circuit);
            if let Some(path) = path {
                write_file("--netlist", path, &text)?;
            }
            Ok((
                json!({
                    "R": circuit.r,
                    "C": circuit.c,
                    "Rs": circuit.rs,
                    "eta": an.eta,
                    "a": an.a,
                    "impedance": an.impedance,
                    "netlist": text,
                }),
                true,
            ))
        }
        Command::Nyquist {
            system,
            csv,
            svg,
            eta,
            points,
            omega_min,
            omega_max,
        } => {
            let r = system.load()?;
            let lo = input::finite_number("--omega-min", omega_min)?;
            let hi = input::finite_number("--omega-max", omega_max)?;
            if !(lo > 0.0 && hi > lo) {
                return Err(InputError::new("--omega-min", "need 0 < omega-min < omega-max").into());
            }
            let eta = eta.as_deref().map(|e| input::eta("--eta", e)).transpose()?;
            let data = plot::nyquist(&r, lo, hi, *points);
            let csv_text = plot::to_csv(&data);
            if let Some(path) = svg {
                write_file("--svg", path, &plot::to_svg(&data, eta))?;
            }
            match csv {
                Some(path) => write_file("--csv", path, &csv_text)?,
                None => {
                    print!("{csv_text}");
                    return Ok((Value::Null, true));
                }
            }
            Ok((json!({ "points": data.omega.len(), "omega_min": lo, "omega_max": hi }), true))
        }
        Command::SetsCheck { set, h, eta, a, seed, samples } => sets_check(*set, h, eta, a.as_deref(), *seed, *samples),
    }
}

fn circle(k: &str, big_k: &str, plant: Option<&str>, opts: &ClassifyOptions) -> Run {
    let k = input::finite_number("--k", k)?;
    let big_k = input::finite_number("--K", big_k)?;
    let sector = lib("--K", Sector::new(k, big_k))?;
    let mut out = json!({ "k": k, "K": big_k });
    if k > 0.0 && big_k > k {
        let (f, eta, a) = lib("--k", circle_transform_eta(&sector))?;
        out["eta"] = to_value(&eta);
        out["a"] = json!(a);
        out["f"] = to_value(&f);
    }
    let Some(text) = plant else {
        return Ok((out, true));
    };
    let plant = input::json("--plant", text)?;
    let one = lib("--plant", criterion(&plant, &sector, CriterionRoute::Classical, opts))?;
    out["classical"] = to_value(&one);
    if k > 0.0 && big_k > k {
        let two = lib("--plant", criterion(&plant, &sector, CriterionRoute::Hyperpositive, opts))?;
        out["hyperpositive"] = to_value(&two);
        out["routes_agree"] = json!(one.criterion_holds == two.criterion_holds);
    }
    out["criterion_holds"] = json!(one.criterion_holds);
    Ok((out, one.criterion_holds))
}

fn parse_nonlinearity(text: &str) -> Parsed<Nonlinearity> {
    const FIELD: &str = "--nonlinearity";
    let (kind, value) = text
        .split_once(':')
        .ok_or_else(|| InputError::new(FIELD, "expected KIND:VALUE"))?;
    let v = input::finite_number(FIELD, value)?;
    Ok(match kind.trim() {
        "linear" => Nonlinearity::Linear { gain: v },
        "saturation" => Nonlinearity::Saturation { level: v },
        "deadzone" => Nonlinearity::Deadzone { width: v },
        "tanh" => Nonlinearity::Tanh { scale: v },
        "time-varying" => Nonlinearity::TimeVarying { omega: v },
        other => return Err(InputError::new(FIELD, format!("unknown nonlinearity `{other}`"))),
    })
}

fn sets_check(set: SetKind, h: &str, eta: &str, a: Option<&str>, seed: Option<u64>, samples: usize) -> Run {
    let h = HermitianMatrix::new_strict(input::matrix("--H", h)?, 1e-12).map_err(|e| InputError::new("--H", e.to_string()))?;
    let eta = input::eta("--eta", eta)?;
    let stein = SteinSetSpec::new(h.clone(), eta);
    let lyap = LyapSetSpec::new(h.clone(), eta);
    if let Some(text) = a {
        let a = input::matrix("--A", text)?;
        let (member, closure, residual) = match set {
            SetKind::Stein => (
                lib("--A", is_stein_member(&stein, &a, 0.0))?,
                lib("--A", is_stein_member_closure(&stein, &a, 1e-10))?,
                lib("--A", stein_residual(&stein, &a))?,
            ),
            SetKind::Lyap => (
                lib("--A", is_lyap_member(&lyap, &a, 0.0))?,
                lib("--A", is_lyap_member_closure(&lyap, &a, 1e-10))?,
                lib("--A", lyap_residual(&lyap, &a))?,
            ),
        };
        return Ok((
            json!({
                "member": member,
                "closure_member": closure,
                "residual_eigenvalues": residual.eigenvalues(),
            }),
            member,
        ));
    }
    let seed = seed.ok_or_else(|| InputError::new("--seed", "required for a randomized run (no --A given)"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eta1 = product_contract_eta(eta);
    let stein1 = SteinSetSpec::new(h.clone(), eta1);
    let (mut not_member, mut correspondence, mut product) = (0, 0, 0);
    for _ in 0..samples {
        let x = lib("--H", random_stein_member(&stein, false, 1e-3, &mut rng))?;
        let y = lib("--H", random_stein_member(&stein, false, 1e-3, &mut rng))?;
        if !lib("--H", is_stein_member(&stein, &x, 0.0))? {
            not_member += 1;
        }
        match cayley(&x) {
            Ok(cx) if lib("--H", is_lyap_member(&lyap, &cx, 0.0))? => {}
            _ => correspondence += 1,
        }
        if !lib("--H", is_stein_member(&stein1, &(&x * &y), 0.0))? {
            product += 1;
        }
    }
    let ok = not_member + correspondence + product == 0;
    Ok((
        json!({
            "seed": seed,
            "samples": samples,
            "eta": eta,
            "product_eta": eta1,
            "sample_failures": not_member,
            "cayley_failures": correspondence,
            "product_failures": product,
        }),
        ok,
    ))
}
