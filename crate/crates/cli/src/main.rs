use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use supertrop::expr::{self, parse_function, to_expr};
use supertrop::ho::{ho_decompose, reducible, OmegaExpr};
use supertrop::kernel::{
    classify, contained, lattice_op, member_certificate, LatticeOp, PrincipalKernel,
};
use supertrop::matroid::{basis_of, build_chain, catenary_dim, condeg, hdim, Chain, HpSet};
use supertrop::pl::{skeleton, Domination};
use supertrop::rat::{fmt_rat, parse_rat, Rat};
use supertrop::{selftest, Error, RationalFunction};

const FORMAT_ENV: &str = "SUPERTROP_FORMAT";

#[derive(Parser, Debug)]
#[command(name = "supertrop", version, about = "Kernels of supertropical rational functions")]
struct Cli {
    /// Emit JSON (default comes from SUPERTROP_FORMAT=json|text).
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 2024)]
    seed: u64,
    /// Number of variables; inferred from the highest index used when absent.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Monomial cap for pattern enumeration.
    #[arg(long, global = true, default_value_t = supertrop::ho::DEFAULT_MAX_MONOMIALS)]
    max_monomials: usize,
    /// Instances per randomized suite.
    #[arg(long, global = true, default_value_t = 20)]
    trials: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate at a point, e.g. `eval "x + y" 1,-1/2`.
    Eval { expr: String, point: String },
    /// Skeleton (zero set of log|f|) as a list of polyhedra.
    Skel { expr: String },
    /// `member <x> in <f>`: is x in ⟨f⟩?
    Member {
        element: String,
        #[arg(value_parser = ["in"], hide = true)]
        kw: String,
        kernel: String,
    },
    /// Equality of principal kernels.
    Keq { a: String, b: String },
    /// Product or intersection of principal kernels.
    Kop {
        op: OpArg,
        #[arg(required = true, num_args = 2..)]
        exprs: Vec<String>,
    },
    /// Kernel class (HP, HS, order, region, HO, ...) with the evidence found.
    Classify { expr: String },
    /// Convex degree of a set of L-monomials.
    Condeg {
        #[arg(required = true)]
        exprs: Vec<String>,
    },
    /// Hyperdimension of the semifield of fractions in n variables.
    Hdim { n: usize },
    /// Maximal descending chain below an HS-kernel.
    Chain { expr: String },
    /// Catenary degree of an HS-kernel L over a region R.
    Caten { l: String, r: String },
    /// HO-decomposition of a positive function.
    Decompose { expr: String },
    /// Reducibility of a kernel built with `cap(...)` and `prod(...)`.
    Reduce { expr: String },
    /// Randomized property suites.
    Selftest {
        /// Restrict to these suites.
        suites: Vec<String>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum OpArg {
    Prod,
    Cap,
}

struct Output {
    text: String,
    json: Value,
    ok: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json_mode = cli.json || std::env::var(FORMAT_ENV).is_ok_and(|v| v.eq_ignore_ascii_case("json"));
    match run(&cli) {
        Ok(out) => {
            if json_mode {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("serializable"));
            } else {
                println!("{}", out.text);
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            if json_mode {
                println!("{}", serde_json::to_string_pretty(&error_json(&e)).expect("serializable"));
            }
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn error_json(e: &Error) -> Value {
    let kind = match e {
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::Parse { .. } => "parse",
        Error::EmptySet => "empty_set",
        Error::NotPositive(_) => "not_positive",
        Error::NotHs(_) => "not_hs",
        Error::NotHo(_) => "not_ho",
        Error::NotInOmega(_) => "not_in_omega",
        Error::EmptySkeleton(_) => "empty_skeleton",
        Error::SizeCap { .. } => "size_cap",
        Error::Disagreement(_) => "disagreement",
        Error::Certification(_) => "certification",
        Error::ConstantMonomial => "constant_monomial",
        Error::Invalid(_) => "invalid",
    };
    let mut v = json!({ "kind": kind, "message": e.to_string() });
    if let Error::Parse { pos, .. } = e {
        v["position"] = json!(pos);
    }
    json!({ "error": v })
}

/// Number of variables shared by all expressions of a command.
fn arity(cli: &Cli, srcs: &[&str]) -> supertrop::Result<usize> {
    let mut n = 1;
    for s in srcs {
        n = n.max(expr::parse(&s.replace("cap(", "meet(").replace("prod(", "meet("))?.arity());
    }
    match cli.n {
        Some(k) if k < n => Err(Error::DimensionMismatch { expected: k, found: n }),
        Some(k) => Ok(k),
        None => Ok(n),
    }
}

fn functions(cli: &Cli, srcs: &[&str]) -> supertrop::Result<(usize, Vec<RationalFunction>)> {
    let n = arity(cli, srcs)?;
    let fs = srcs.iter().map(|s| parse_function(s, Some(n))).collect::<supertrop::Result<_>>()?;
    Ok((n, fs))
}

fn show(f: &RationalFunction) -> String {
    to_expr(f).to_string()
}

fn parse_point(src: &str) -> supertrop::Result<Vec<Rat>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for part in src.split(',') {
        let t = part.trim();
        let lead = part.len() - part.trim_start().len();
        let r = parse_rat(t).map_err(|_| Error::Parse {
            pos: offset + lead,
            msg: format!("`{t}` is not a rational number"),
        })?;
        out.push(r);
        offset += part.len() + 1;
    }
    Ok(out)
}

fn verdict(d: &Domination) -> String {
    match d {
        Domination::Dominates { n } => format!("certificate N = {n}"),
        Domination::Fails { witness } => format!(
            "witness point ({}) direction ({})",
            witness.point.iter().map(fmt_rat).collect::<Vec<_>>().join(", "),
            witness.direction.iter().map(fmt_rat).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn chain_text(c: &Chain) -> String {
    let mut lines = Vec::new();
    for (k, step) in c.kernels.iter().zip(&c.steps) {
        lines.push(format!("  {k}  (drop {})", step.factor));
    }
    if let Some(last) = c.kernels.last() {
        lines.push(format!("  {last}"));
    }
    lines.join("\n")
}

fn lmonomials(n: usize, srcs: &[String]) -> supertrop::Result<HpSet> {
    let elems = srcs
        .iter()
        .map(|s| match OmegaExpr::parse(s, Some(n))? {
            OmegaExpr::Hp(l) => Ok(l),
            _ => Err(Error::NotInOmega(format!("`{s}` is not a single L-monomial"))),
        })
        .collect::<supertrop::Result<Vec<_>>>()?;
    HpSet::new(n, elems)
}

fn run(cli: &Cli) -> supertrop::Result<Output> {
    let done = |text: String, json: Value| Ok(Output { text, json, ok: true });
    match &cli.cmd {
        Cmd::Eval { expr, point } => {
            let (n, fs) = functions(cli, &[expr])?;
            let p = parse_point(point)?;
            if p.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.len() });
            }
            let v = fs[0].eval(&p)?;
            done(
                v.to_string(),
                json!({ "verb": "eval", "n": n, "function": show(&fs[0]), "point": p.iter().map(fmt_rat).collect::<Vec<_>>(), "value": v }),
            )
        }
        Cmd::Skel { expr } => {
            let (n, fs) = functions(cli, &[expr])?;
            let sk = skeleton(&fs[0]);
            let dim = sk.dimension();
            let text = if sk.is_empty() {
                "empty skeleton".to_string()
            } else {
                let mut t = format!("{} pieces, dimension {}", sk.pieces.len(), dim.unwrap_or(0));
                for p in &sk.pieces {
                    let rows: Vec<String> = p
                        .inequality_rows()
                        .iter()
                        .map(|h| format!("[{}] <= {}", h.a.iter().map(fmt_rat).collect::<Vec<_>>().join(" "), fmt_rat(&h.b)))
                        .collect();
                    t.push_str(&format!("\n  {}", rows.join(", ")));
                }
                t
            };
            done(
                text,
                json!({ "verb": "skel", "n": n, "function": show(&fs[0]), "empty": sk.is_empty(), "dimension": dim, "pieces": sk.pieces }),
            )
        }
        Cmd::Member { element, kernel, .. } => {
            let (n, fs) = functions(cli, &[element, kernel])?;
            let k = PrincipalKernel::new(&fs[1]);
            let cert = member_certificate(&fs[0], &k)?;
            let holds = cert.holds();
            done(
                format!("{holds}: {}", verdict(&cert)),
                json!({ "verb": "member", "n": n, "element": show(&fs[0]), "kernel": k, "member": holds, "certificate": cert }),
            )
        }
        Cmd::Keq { a, b } => {
            let (n, fs) = functions(cli, &[a, b])?;
            let (ka, kb) = (PrincipalKernel::new(&fs[0]), PrincipalKernel::new(&fs[1]));
            let fwd = contained(&ka, &kb)?;
            let bwd = contained(&kb, &ka)?;
            let eq = fwd.holds() && bwd.holds();
            let text = if eq {
                "true".to_string()
            } else if !fwd.holds() {
                format!("false: first not inside second, {}", verdict(&fwd))
            } else {
                format!("false: second not inside first, {}", verdict(&bwd))
            };
            done(
                text,
                json!({ "verb": "keq", "n": n, "a": ka, "b": kb, "equal": eq, "a_in_b": fwd, "b_in_a": bwd }),
            )
        }
        Cmd::Kop { op, exprs } => {
            let srcs: Vec<&str> = exprs.iter().map(String::as_str).collect();
            let (n, fs) = functions(cli, &srcs)?;
            let op = match op {
                OpArg::Prod => LatticeOp::Product,
                OpArg::Cap => LatticeOp::Intersect,
            };
            let mut acc = PrincipalKernel::new(&fs[0]);
            for f in &fs[1..] {
                acc = lattice_op(op, &acc, &PrincipalKernel::new(f))?;
            }
            done(acc.to_string(), json!({ "verb": "kop", "n": n, "op": op, "kernel": acc }))
        }
        Cmd::Classify { expr } => {
            let (n, fs) = functions(cli, &[expr])?;
            let k = PrincipalKernel::new(&fs[0]);
            let c = classify(&k)?;
            let mut text = c.tag.to_string();
            let ev = &c.evidence;
            if !ev.hp.is_empty() {
                text.push_str(&format!("\n  hp: {}", join(&ev.hp)));
            }
            if !ev.order.is_empty() {
                text.push_str(&format!("\n  order: {}", join(&ev.order)));
            }
            if let Some(lb) = &ev.lower_bound {
                text.push_str(&format!("\n  lower bound: {}", fmt_rat(lb)));
            }
            done(text, json!({ "verb": "classify", "n": n, "kernel": k, "class": c }))
        }
        Cmd::Condeg { exprs } => {
            let srcs: Vec<&str> = exprs.iter().map(String::as_str).collect();
            let n = arity(cli, &srcs)?;
            let set = lmonomials(n, exprs)?;
            let d = condeg(&set);
            let basis = basis_of(&set);
            done(
                format!("{d}\n  basis: {}", join(&basis.elems)),
                json!({ "verb": "condeg", "n": n, "set": set.elems, "condeg": d, "basis": basis.elems }),
            )
        }
        Cmd::Hdim { n } => {
            if cli.n.is_some_and(|k| k != *n) {
                return Err(Error::DimensionMismatch { expected: cli.n.unwrap_or(*n), found: *n });
            }
            let (d, chain) = hdim(*n)?;
            done(format!("{d}\n{}", chain_text(&chain)), json!({ "verb": "hdim", "n": n, "hdim": d, "chain": chain }))
        }
        Cmd::Chain { expr } => {
            let (n, fs) = functions(cli, &[expr])?;
            let k = PrincipalKernel::new(&fs[0]);
            let chain = build_chain(&k)?;
            done(
                format!("length {}\n{}", chain.length, chain_text(&chain)),
                json!({ "verb": "chain", "n": n, "kernel": k, "chain": chain }),
            )
        }
        Cmd::Caten { l, r } => {
            let (n, fs) = functions(cli, &[l, r])?;
            let (kl, kr) = (PrincipalKernel::new(&fs[0]), PrincipalKernel::new(&fs[1]));
            let c = catenary_dim(&kl, &kr)?;
            let text = format!(
                "{}\n  extension modulo R: {} ({})",
                c.value,
                c.extension.len(),
                if c.agrees { "agrees" } else { "disagrees" }
            );
            done(text, json!({ "verb": "caten", "n": n, "l": kl, "r": kr, "catenary": c }))
        }
        Cmd::Decompose { expr } => {
            let (n, fs) = functions(cli, &[expr])?;
            let d = ho_decompose(&fs[0], cli.max_monomials)?;
            let mut text = String::new();
            for (i, k) in d.k_parts.iter().enumerate() {
                text.push_str(&format!("K{}: {} · {}\n", i + 1, k.hs, k.region));
            }
            for (j, p) in d.n_parts.iter().enumerate() {
                text.push_str(&format!("N{}: {}  (inf {})\n", j + 1, p.kernel, fmt_rat(&p.lower_bound)));
            }
            text.push_str(&format!(
                "certified: {}, modulo <F>: {}",
                d.certified, d.certified_mod_bounded
            ));
            let ok = d.certified && d.certified_mod_bounded;
            Ok(Output {
                text,
                json: json!({ "verb": "decompose", "n": n, "function": show(&fs[0]), "decomposition": d }),
                ok,
            })
        }
        Cmd::Reduce { expr } => {
            let n = arity(cli, &[expr])?;
            let e = OmegaExpr::parse(expr, Some(n))?;
            let nf: Vec<Vec<String>> = e.normal_form().iter().map(|t| t.iter().map(ToString::to_string).collect()).collect();
            let split = reducible(&e)?;
            let text = match &split {
                Some((g, h)) => format!("reducible: {g} ∩ {h}"),
                None => "irreducible".to_string(),
            };
            done(
                text,
                json!({
                    "verb": "reduce", "n": n, "kernel": e.kernel()?, "normal_form": nf,
                    "reducible": split.is_some(), "split": split.map(|(g, h)| vec![g, h]),
                }),
            )
        }
        Cmd::Selftest { suites } => {
            for s in suites {
                if !selftest::suite_names().contains(&s.as_str()) {
                    return Err(Error::Invalid(format!(
                        "unknown suite `{s}`; known: {}",
                        selftest::suite_names().join(", ")
                    )));
                }
            }
            let reports = selftest::run(cli.seed, cli.trials, suites);
            let ok = reports.iter().all(selftest::SuiteReport::ok);
            let mut text = format!("seed {}, {} trials per suite", cli.seed, cli.trials);
            for r in &reports {
                text.push_str(&format!("\n{:<14} {} passed, {} failed", r.name, r.passed, r.failed));
                for f in &r.failures {
                    text.push_str(&format!("\n    {f}"));
                }
            }
            Ok(Output {
                text,
                json: json!({ "verb": "selftest", "seed": cli.seed, "trials": cli.trials, "ok": ok, "suites": reports }),
                ok,
            })
        }
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}
