//! Command-line front end: validation, preantipode solving, reconstruction,
//! finite duals, comodule dualization and the example zoo, over bit-stable
//! JSON files.
//!
//! Exit codes: 0 = valid/success, 1 = axiom failure (report emitted),
//! 2 = I/O or schema error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use coquasi::coalg::{check_algebra, check_coalgebra, Algebra, Coalgebra};
use coquasi::comodcat::{check_comodule, dual_comodule, Comodule, ComoduleFile, OverRef};
use coquasi::cqb::{
    check_preantipode, solve_preantipode, validate_coquasi, CoquasiBialgebra, Preantipode,
    PreantipodeOutcome,
};
use coquasi::exactla::{Field, LinearMap, Scalar};
use coquasi::qb::{
    check_antimultiplicativity, check_pq_identities, check_quasi_preantipode, check_s_recovery,
    compute_pq, finite_dual, pq_closed_forms, solve_quasi_preantipode, validate_quasi,
    QuasiBialgebra, QuasiPreantipode, QuasiPreantipodeOutcome,
};
use coquasi::recon::{
    can_map, coend_bialgebra, coend_coalgebra, coend_preantipode, validate_diagram,
    MonoidalDiagram,
};
use coquasi::report::Report;
use coquasi::zoo::{gen_group_coquasi, gen_group_quasi, ZooSpec};

#[derive(Parser)]
#[command(name = "coquasi", version, about = "Exact coquasi-bialgebra toolkit")]
struct Cli {
    /// Expected ground field, "rational" or "fp:5"-style; files in another field
    /// are rejected.
    #[arg(long, global = true)]
    field: Option<String>,

    /// Report rendering on stdout.
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Text)]
    report: ReportFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Coquasi,
    Quasi,
    Coalgebra,
    Algebra,
    Comodule,
    Diagram,
}

#[derive(Subcommand)]
enum Command {
    /// Check every axiom of a structure file.
    Validate {
        file: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        /// For comodule files whose "over" is a name: the coquasi file.
        #[arg(long)]
        over: Option<PathBuf>,
    },
    /// Solve for or check a preantipode.
    Preantipode {
        #[command(subcommand)]
        action: PreantipodeAction,
    },
    /// Tannaka reconstruction from a monoidal diagram: coend coalgebra,
    /// induced (m, u, ω), the ∇ preantipode, and the can comparison when the
    /// diagram carries coactions over a coquasi-bialgebra.
    Reconstruct {
        diagram: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Finite dual of a quasi-bialgebra with preantipode (solved on the fly).
    FiniteDual {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Right dual of a comodule inside the comodule category.
    DualizeComodule {
        file: PathBuf,
        #[arg(long)]
        over: Option<PathBuf>,
        /// Preantipode file; solved from the coquasi structure when absent.
        #[arg(long)]
        preantipode: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the complete p/q calculus on a quasi-bialgebra: closed forms,
    /// invariance identities, recovery lemma and anti-multiplicativity.
    AppendixCheck {
        file: PathBuf,
        preantipode: Option<PathBuf>,
    },
    /// Generate zoo members from a group table plus normalized 3-cocycle.
    Example {
        #[command(subcommand)]
        which: ExampleKind,
    },
}

#[derive(Subcommand)]
enum PreantipodeAction {
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Coquasi)]
        kind: Kind,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    Check {
        file: PathBuf,
        preantipode: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Coquasi)]
        kind: Kind,
    },
}

#[derive(Args)]
struct ExampleArgs {
    /// ZooSpec JSON file ({"group": [[..]], "cocycle": [..], "field", "kind"}).
    spec: Option<PathBuf>,
    /// Build a cyclic group of this order instead of reading a spec file.
    #[arg(long, conflicts_with = "spec")]
    cyclic: Option<usize>,
    /// Build a product of two cyclic groups, e.g. --product 2,2.
    #[arg(long, conflicts_with_all = ["spec", "cyclic"])]
    product: Option<String>,
    /// Exponent k of the standard cocycle θ^k (0 = trivial); θ is the smallest
    /// element of exact order n in the field.
    #[arg(long, default_value_t = 0)]
    theta_pow: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExampleKind {
    /// Twisted group algebra kG with its closed-form preantipode.
    GroupCoquasi(ExampleArgs),
    /// Function algebra k^G with Φ from the cocycle.
    GroupQuasi(ExampleArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

type Failure = Box<dyn std::error::Error>;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let value = serde_json::from_str(&text)
        .map_err(|e| format!("schema error in {}: {e}", path.display()))?;
    Ok(value)
}

fn write_output<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) =>

            std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_report(report: &Report, format: ReportFormat) -> Result<ExitCode, Failure> {
    match format {
        ReportFormat::Json => println!("{}", serde_json::to_string_pretty(report)?),
        ReportFormat::Text => println!("{report}"),
    }
    Ok(if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn expected_field(spec: &Option<String>) -> Result<Option<Field>, Failure> {
    match spec {
        None => Ok(None),
        Some(s) => Ok(Some(s.parse::<Field>()?)),
    }
}

fn check_field(expect: Option<Field>, actual: Field) -> Result<(), Failure> {
    if let Some(f) = expect {
        if f != actual {
            return Err(format!("file is over {actual}, expected {f}").into());
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let field = expected_field(&cli.field)?;
    match cli.command {
        Command::Validate { file, kind, over } => {
            let report = match kind {
                Kind::Coquasi => {
                    let h: CoquasiBialgebra = read_json(&file)?;
                    check_field(field, h.field())?;
                    validate_coquasi(&h)
                }
                Kind::Quasi => {
                    let a: QuasiBialgebra = read_json(&file)?;
                    check_field(field, a.field())?;
                    validate_quasi(&a)
                }
                Kind::Coalgebra => {
                    let c: Coalgebra = read_json(&file)?;
                    check_field(field, c.field())?;
                    check_coalgebra(&c)
                }
                Kind::Algebra => {
                    let a: Algebra = read_json(&file)?;
                    check_field(field, a.field())?;
                    check_algebra(&a)
                }
                Kind::Comodule => {
                    let v = load_comodule(&file, over.as_deref())?;
                    check_field(field, v.rho.field())?;
                    check_comodule(&v)
                }
                Kind::Diagram => {
                    let d: MonoidalDiagram = read_json(&file)?;
                    validate_diagram(&d)
                }
            };
            emit_report(&report, cli.report)
        }

        Command::Preantipode { action } => match action {
            PreantipodeAction::Solve { file, kind, output } => match kind {
                Kind::Coquasi => {
                    let h: CoquasiBialgebra = read_json(&file)?;
                    check_field(field, h.field())?;
                    match solve_preantipode(&h) {
                        PreantipodeOutcome::Unique(s) => {
                            write_output(&s, output.as_deref())?;
                            Ok(ExitCode::SUCCESS)
                        }
                        PreantipodeOutcome::None => {
                            let mut r = Report::new();
                            r.fail("preantipode.inconsistent", vec![]);
                            emit_report(&r, cli.report)
                        }
                        PreantipodeOutcome::NonUnique { nullspace_dim } => {
                            let mut r = Report::new();
                            r.fail("preantipode.nonunique", vec![nullspace_dim]);
                            emit_report(&r, cli.report)
                        }
                    }
                }
                Kind::Quasi => {
                    let a: QuasiBialgebra = read_json(&file)?;
                    check_field(field, a.field())?;
                    match solve_quasi_preantipode(&a) {
                        QuasiPreantipodeOutcome::Unique(s) => {
                            write_output(&s, output.as_deref())?;
                            Ok(ExitCode::SUCCESS)
                        }
                        QuasiPreantipodeOutcome::None => {
                            let mut r = Report::new();
                            r.fail("preantipode.inconsistent", vec![]);
                            emit_report(&r, cli.report)
                        }
                        QuasiPreantipodeOutcome::NonUnique { nullspace_dim } => {
                            let mut r = Report::new();
                            r.fail("preantipode.nonunique", vec![nullspace_dim]);
                            emit_report(&r, cli.report)
                        }
                    }
                }
                _ => Err("preantipode solve expects --kind coquasi or quasi".into()),
            },
            PreantipodeAction::Check {
                file,
                preantipode,
                kind,
            } => match kind {
                Kind::Coquasi => {
                    let h: CoquasiBialgebra = read_json(&file)?;
                    check_field(field, h.field())?;
                    let s: Preantipode = read_json(&preantipode)?;
                    emit_report(&check_preantipode(&h, &s), cli.report)
                }
                Kind::Quasi => {
                    let a: QuasiBialgebra = read_json(&file)?;
                    check_field(field, a.field())?;
                    let s: QuasiPreantipode = read_json(&preantipode)?;
                    emit_report(&check_quasi_preantipode(&a, &s), cli.report)
                }
                _ => Err("preantipode check expects --kind coquasi or quasi".into()),
            },
        },

        Command::Reconstruct { diagram, output } => {
            let d: MonoidalDiagram = read_json(&diagram)?;
            let diag_report = validate_diagram(&d);
            if !diag_report.pass {
                return emit_report(&diag_report, cli.report);
            }
            let coend = coend_coalgebra(&d)?;
            let have_tensor = d.objects.iter().all(|x| {
                d.objects
                    .iter()
                    .all(|y| d.tensor_entry(&x.name, &y.name).is_ok())
            });
            let mut report = Report::new();
            let mut h = None;
            let mut s = None;
            if have_tensor {
                let bia = coend_bialgebra(&d, &coend)?;
                if d.objects.iter().all(|o| d.dual_entry(&o.name).is_ok()) {
                    s = Some(coend_preantipode(&d, &coend, &bia)?);
                }
                h = Some(bia);
            }
            if let Some(b) = &d.over {
                let s_b = match solve_preantipode(b) {
                    PreantipodeOutcome::Unique(p) => Some(p),
                    _ => None,
                };
                let (_, can_report) =
                    can_map(&d, &coend, h.as_ref(), s.as_ref(), b, s_b.as_ref())?;
                report.absorb(can_report);
            }
            #[derive(Serialize)]
            struct ReconOut<'a> {
                coalgebra: &'a Coalgebra,
                #[serde(skip_serializing_if = "Option::is_none")]
                mult: Option<&'a LinearMap>,
                #[serde(skip_serializing_if = "Option::is_none")]
                unit: Option<Vec<Scalar>>,
                #[serde(skip_serializing_if = "Option::is_none")]
                omega: Option<Vec<Scalar>>,
                proj: &'a BTreeMap<String, LinearMap>,
                #[serde(skip_serializing_if = "Option::is_none")]
                preantipode: Option<&'a Preantipode>,
            }
            let out = ReconOut {
                coalgebra: h.as_ref().map(|x| &x.coalgebra).unwrap_or(&coend.coalgebra),
                mult: h.as_ref().map(|x| &x.mult),
                unit: h.as_ref().map(|x| x.unit.column_vec(0)),
                omega: h.as_ref().map(|x| x.omega.row_slice(0).to_vec()),
                proj: &coend.proj,
                preantipode: s.as_ref(),
            };
            write_output(&out, output.as_deref())?;
            emit_report(&report, cli.report)
        }

        Command::FiniteDual { file, output } => {
            let a: QuasiBialgebra = read_json(&file)?;
            check_field(field, a.field())?;
            let valid = validate_quasi(&a);
            if !valid.pass {
                return emit_report(&valid, cli.report);
            }
            let s = match solve_quasi_preantipode(&a) {
                QuasiPreantipodeOutcome::Unique(s) => s,
                _ => {
                    let mut r = Report::new();
                    r.fail("preantipode.inconsistent", vec![]);
                    return emit_report(&r, cli.report);
                }
            };
            let (h, p) = finite_dual(&a, &s)?;
            #[derive(Serialize)]
            struct DualOut<'a> {
                #[serde(flatten)]
                coquasi: &'a CoquasiBialgebra,
                preantipode: &'a Preantipode,
            }
            write_output(
                &DualOut {
                    coquasi: &h,
                    preantipode: &p,
                },
                output.as_deref(),
            )?;
            Ok(ExitCode::SUCCESS)
        }

        Command::DualizeComodule {
            file,
            over,
            preantipode,
            output,
        } => {
            let v = load_comodule(&file, over.as_deref())?;
            check_field(field, v.rho.field())?;
            let s = match preantipode {
                Some(p) => read_json::<Preantipode>(&p)?,
                None => match solve_preantipode(&v.h) {
                    PreantipodeOutcome::Unique(s) => s,
                    _ => {
                        let mut r = Report::new();
                        r.fail("preantipode.inconsistent", vec![]);
                        return emit_report(&r, cli.report);
                    }
                },
            };
            let data = dual_comodule(&v, &s)?;
            #[derive(Serialize)]
            struct DualComoduleOut {
                dim: usize,
                rho: LinearMap,
                ev: Vec<Scalar>,
                db: Vec<Scalar>,
            }
            write_output(
                &DualComoduleOut {
                    dim: data.dual.dim,
                    rho: data.dual.rho.clone(),
                    ev: data.ev.row_slice(0).to_vec(),
                    db: data.db.column_vec(0),
                },
                output.as_deref(),
            )?;
            Ok(ExitCode::SUCCESS)
        }

        Command::AppendixCheck { file, preantipode } => {
            let a: QuasiBialgebra = read_json(&file)?;
            check_field(field, a.field())?;
            let mut report = validate_quasi(&a);
            let s = match preantipode {
                Some(p) => read_json::<QuasiPreantipode>(&p)?,
                None => match solve_quasi_preantipode(&a) {
                    QuasiPreantipodeOutcome::Unique(s) => s,
                    _ => {
                        report.fail("preantipode.inconsistent", vec![]);
                        return emit_report(&report, cli.report);
                    }
                },
            };
            report.absorb(check_quasi_preantipode(&a, &s));
            let pq = compute_pq(&a, &s);
            let closed = pq_closed_forms(&a, &s);
            if pq != closed {
                report.fail("pq.closed_form", vec![]);
            }
            report.absorb(check_pq_identities(&a, &pq));
            report.absorb(check_s_recovery(&a, &s, &pq));
            report.absorb(check_antimultiplicativity(&a, &s));
            emit_report(&report, cli.report)
        }

        Command::Example { which } => {
            let (args, coquasi_side) = match which {
                ExampleKind::GroupCoquasi(a) => (a, true),
                ExampleKind::GroupQuasi(a) => (a, false),
            };
            let spec = build_zoospec(&args, field, coquasi_side)?;
            if coquasi_side {
                let z = gen_group_coquasi(&spec)?;
                #[derive(Serialize)]
                struct Out<'a> {
                    #[serde(flatten)]
                    coquasi: &'a CoquasiBialgebra,
                    preantipode: &'a Preantipode,
                }
                write_output(
                    &Out {
                        coquasi: &z.h,
                        preantipode: &z.preantipode,
                    },
                    args.output.as_deref(),
                )?;
            } else {
                let z = gen_group_quasi(&spec)?;
                #[derive(Serialize)]
                struct Out<'a> {
                    #[serde(flatten)]
                    quasi: &'a QuasiBialgebra,
                    preantipode: &'a QuasiPreantipode,
                }
                write_output(
                    &Out {
                        quasi: &z.a,
                        preantipode: &z.preantipode,
                    },
                    args.output.as_deref(),
                )?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_comodule(path: &Path, over: Option<&Path>) -> Result<Comodule, Failure> {
    let file: ComoduleFile = read_json(path)?;
    match (&file.over, over) {
        (OverRef::Inline(_), _) => Ok(file.into_comodule(|_| None)?),
        (OverRef::Name(_), Some(h_path)) => {
            let h: CoquasiBialgebra = read_json(h_path)?;
            Ok(file.into_comodule(|_| Some(h))?)
        }
        (OverRef::Name(name), None) => {
            Err(format!("comodule references {name:?}; pass --over <coquasi.json>").into())
        }
    }
}

fn build_zoospec(args: &ExampleArgs, field: Option<Field>, coquasi: bool) -> Result<ZooSpec, Failure> {
    use coquasi::zoo::{cyclic_cocycle, product_cocycle, trivial_cocycle, GroupTable, ZooKind};
    if let Some(path) = &args.spec {
        let spec: ZooSpec = read_json(path)?;
        check_field(field, spec.field)?;
        return Ok(spec);
    }
    let f = field.unwrap_or(Field::Rational);
    let kind = if coquasi { ZooKind::Coquasi } else { ZooKind::Quasi };
    let theta_cocycle = |n: usize| -> Result<Vec<Scalar>, Failure> {
        if args.theta_pow == 0 {
            return Ok(trivial_cocycle(f, &GroupTable::cyclic(n)));
        }
        let theta = f
            .root_of_unity(n as u64)
            .ok_or_else(|| format!("no element of order {n} in {f}; pick another --field"))?
            .pow(args.theta_pow);
        Ok(cyclic_cocycle(f, n, &theta)?)
    };
    if let Some(n) = args.cyclic {
        let group = GroupTable::cyclic(n);
        let cocycle = theta_cocycle(n)?;
        return Ok(ZooSpec::new(group, cocycle, f, kind)?);
    }
    if let Some(spec) = &args.product {
        let (a, b) = spec.split_once(',').ok_or("expected --product N,M")?;
        let (na, nb): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
        let (ga, gb) = (GroupTable::cyclic(na), GroupTable::cyclic(nb));
        let (ca, cb) = (theta_cocycle(na)?, theta_cocycle(nb)?);
        let group = GroupTable::product(&ga, &gb)?;
        let cocycle = product_cocycle(&ga, &ca, &gb, &cb);
        return Ok(ZooSpec::new(group, cocycle, f, kind)?);
    }
    Err("pass a zoospec file, --cyclic N, or --product N,M".into())
}
