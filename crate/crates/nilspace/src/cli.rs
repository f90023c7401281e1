//! Command-line front end: Host-Kra membership and factorization,
//! nilmanifold cube checks, the finite cubespace engine, and Gowers
//! analytics, with line-oriented or JSON reports.
//!
//! Exit codes: 0 pass, 1 fail (a checked property is violated), 2
//! usage/parse error, 3 internal inconsistency.

use crate::error::{Error, Result};
use crate::gowers::{
    correlation, gowers_inner_product, gowers_inner_product_mc, gowers_norm, gowers_norm_mc,
    heis_vertical_character, nilsequence, CyclicFunction,
};
use crate::group::{lookup_group, parse_element, parse_rat, GroupElement};
use crate::hk::{face_coordinates, hk_corner_complete, hk_membership, Configuration, Corner};
use crate::nil::{
    heisenberg_cocycle, nil_corner_complete, nil_cube_membership, parse_nil_point, NilPoint,
    Nilmanifold,
};
use crate::poly::PolySequence;
use crate::report::Report;
use crate::space::{
    build_ds_cubespace, canonical_tower, certify_nilspace, check_completion, check_fibration,
    check_uniqueness, structure_group, CubespaceMap, FiniteCubespace,
};
use clap::{Args, Parser, Subcommand};
use num::Zero;
use std::io::Read;
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "nilspace",
    about = "Exact cube groups over filtered groups, finite cubespaces, and Gowers norms",
    version
)]
struct Cli {
    /// Emit reports as JSON instead of line-oriented text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized modes (Monte Carlo sampling).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Host-Kra cube groups over filtered groups.
    #[command(subcommand)]
    Hk(HkCommand),
    /// Cubes on nilmanifolds (torus / Heisenberg).
    #[command(subcommand)]
    Nil(NilCommand),
    /// Finite cubespace engine.
    #[command(subcommand)]
    Space(SpaceCommand),
    /// Gowers uniformity analytics on Z/NZ.
    #[command(subcommand)]
    Gowers(GowersCommand),
}

#[derive(Subcommand)]
enum HkCommand {
    /// Decide membership of a configuration in HK^k and print the face
    /// coordinates or the violating coordinate.
    Check(GroupConfigArgs),
    /// Complete a k-corner to a cube-group member.
    Complete {
        /// Filtered-group id (z, q1, q2, qq2, heis, t1, t2, zN, dS_zNxM...).
        #[arg(long)]
        group: String,
        /// Corner file: 2^k - 1 serialized elements, one per line, in
        /// binary-counting vertex order with the top vertex omitted.
        #[arg(long)]
        corner: String,
    },
    /// Print the face-coordinate factorization of a configuration.
    Factor(GroupConfigArgs),
}

#[derive(Args)]
struct GroupConfigArgs {
    /// Filtered-group id (z, q1, q2, qq2, heis, t1, t2, zN, dS_zNxM...).
    #[arg(long)]
    group: String,
    /// Configuration file: 2^k serialized elements, one per line, in
    /// binary-counting vertex order; `-` for stdin.
    #[arg(long)]
    config: String,
}

#[derive(Subcommand)]
enum NilCommand {
    /// Decide whether a configuration of nilmanifold points is a cube.
    Check {
        /// Parent nilmanifold: `heis` or `t<dim>`.
        #[arg(long)]
        parent: String,
        /// Torus degree (ignored for heis).
        #[arg(long, default_value_t = 1)]
        degree: u32,
        /// Configuration file: 2^k points (`hnil:...` / `tnil:...`), one
        /// per line; `-` for stdin.
        #[arg(long)]
        config: String,
    },
    /// Complete a corner of nilmanifold points.
    Complete {
        #[arg(long)]
        parent: String,
        #[arg(long, default_value_t = 1)]
        degree: u32,
        /// Corner file: 2^k - 1 points, one per line, top vertex omitted.
        #[arg(long)]
        corner: String,
    },
    /// Evaluate the degree-3 Heisenberg cocycle on reduced x/y data.
    Cocycle {
        /// Eight comma-separated rationals: the x-coordinates in
        /// binary-counting vertex order.
        #[arg(long)]
        x: String,
        /// Eight comma-separated rationals: the y-coordinates.
        #[arg(long)]
        y: String,
    },
}

#[derive(Subcommand)]
enum SpaceCommand {
    /// Full nilspace certification: axioms, completion, glueing, degree.
    Certify(SpaceFileArg),
    /// k-uniqueness check.
    Uniqueness {
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        space: SpaceFileArg,
    },
    /// k-completion check.
    Completion {
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        space: SpaceFileArg,
    },
    /// The canonical quotient tower.
    Tower(SpaceFileArg),
    /// Extract the structure group of a fibration (onto a point if no map
    /// is given).
    StructureGroup {
        #[arg(long)]
        s: u32,
        /// Map file (`src -> dst` lines); omitted means the map to a point.
        #[arg(long)]
        map: Option<String>,
        /// Target space file (required with --map).
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        space: SpaceFileArg,
    },
    /// Check that a map is a fibration.
    Fibration {
        /// Map file (`src -> dst` lines).
        #[arg(long)]
        map: String,
        /// Target space file.
        #[arg(long)]
        target: String,
        /// Check corners up to this dimension (default: common k_max).
        #[arg(long)]
        k: Option<u32>,
        #[command(flatten)]
        space: SpaceFileArg,
    },
    /// Generate D_s(A) for a finite abelian group and print it.
    MakeDs {
        /// Abelian group id: `z4`, `z2x4`, ...
        #[arg(long)]
        group: String,
        #[arg(long)]
        s: u32,
        /// Largest stored cube dimension (default s + 2).
        #[arg(long)]
        kmax: Option<u32>,
    },
}

#[derive(Args)]
struct SpaceFileArg {
    /// Cubespace file; `-` or omitted reads stdin.
    #[arg(long)]
    file: Option<String>,
}

#[derive(Subcommand)]
enum GowersCommand {
    /// The Gowers U^k norm of a CSV-sampled function.
    Norm {
        #[arg(long)]
        k: u32,
        /// Function CSV (`n,re,im`); `-` for stdin.
        #[arg(long = "fn")]
        func: String,
        /// Expected modulus (validated against the CSV if given).
        #[arg(long = "N")]
        n: Option<usize>,
        /// Monte Carlo sample count instead of exhaustive enumeration.
        #[arg(long)]
        monte_carlo: Option<u64>,
    },
    /// The Gowers inner product of 2^k functions.
    Inner {
        #[arg(long)]
        k: u32,
        /// 2^k function CSVs in binary-counting vertex order.
        #[arg(long = "fns", num_args = 1.., value_delimiter = ',')]
        funcs: Vec<String>,
        #[arg(long)]
        monte_carlo: Option<u64>,
    },
    /// Sample the Heisenberg nilsequence n -> e(z(reduce(heis(an, bn, 0))))
    /// and print it as CSV.
    Nilseq {
        /// Rational slope of the x-coordinate, e.g. 1/7.
        #[arg(long)]
        alpha: String,
        /// Rational slope of the y-coordinate, e.g. 1/5.
        #[arg(long)]
        beta: String,
        /// Number of samples (the modulus of the emitted function).
        #[arg(long = "N")]
        n: usize,
    },
    /// The correlation E_x f(x) conj(g(x)).
    Correlate {
        #[arg(long = "fn")]
        func: String,
        #[arg(long = "with")]
        with: String,
    },
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Help and version requests are not usage errors.
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(Outcome::Report(report)) => {
            if cli.json {
                println!("{}", report.render_json());
            } else {
                print!("{}", report.render_text());
            }
            if report.passed() {
                0
            } else {
                1
            }
        }
        Ok(Outcome::Artifact(text)) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Internal(_) | Error::NotEquivalence(..) => 3,
                _ => 2,
            }
        }
    }
}

enum Outcome {
    Report(Report),
    Artifact(String),
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Hk(cmd) => run_hk(cmd),
        Command::Nil(cmd) => run_nil(cmd),
        Command::Space(cmd) => run_space(cmd),
        Command::Gowers(cmd) => run_gowers(cmd, cli.seed),
    }
}

fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

fn nonempty_lines(text: &str) -> Vec<&str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect()
}

fn infer_dim(len: usize) -> Result<u32> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Parse(format!("{len} vertices is not a power of two")));
    }
    Ok(len.trailing_zeros())
}

/// Render a subset of [k] as a k-character 0/1 string, first coordinate
/// leftmost.
fn mask_string(mask: u32, k: u32) -> String {
    (0..k.max(1)).map(|i| if mask >> i & 1 == 1 { '1' } else { '0' }).collect()
}

fn parse_config_file(path: &str) -> Result<Configuration> {
    let text = read_input(path)?;
    let lines = nonempty_lines(&text);
    let dim = infer_dim(lines.len())?;
    let values: Result<Vec<GroupElement>> = lines.iter().map(|l| parse_element(l)).collect();
    Configuration::new(dim, values?)
}

fn run_hk(cmd: &HkCommand) -> Result<Outcome> {
    match cmd {
        HkCommand::Check(args) => {
            let g = lookup_group(&args.group)?;
            let config = parse_config_file(&args.config)?;
            let verdict = hk_membership(&config, &g)?;
            let mut report = Report::new("hk-check");
            report.metric("group", &g.id);
            report.metric("k", config.dim);
            if verdict.is_member {
                for (mask, x) in
                    verdict.face_coords.order.masks.iter().zip(&verdict.face_coords.coords)
                {
                    report.metric(format!("x[{}]", mask_string(*mask, config.dim)), x.serialize()?);
                }
            } else if let Some((mask, x)) = &verdict.witness {
                report.push(
                    "not-a-member",
                    format!(
                        "face coordinate x[{}] = {} is not in G_{}",
                        mask_string(*mask, config.dim),
                        x.serialize()?,
                        mask.count_ones()
                    ),
                );
            }
            Ok(Outcome::Report(report))
        }
        HkCommand::Complete { group, corner } => {
            let g = lookup_group(group)?;
            let text = read_input(corner)?;
            let lines = nonempty_lines(&text);
            let dim = infer_dim(lines.len() + 1)?;
            let values: Result<Vec<GroupElement>> =
                lines.iter().map(|l| parse_element(l)).collect();
            let corner = Corner::new(dim, values?)?;
            let top = hk_corner_complete(&corner, &g)?;
            let mut report = Report::new("hk-complete");
            report.metric("group", &g.id);
            report.metric("k", dim);
            report.metric("top", top.serialize()?);
            Ok(Outcome::Report(report))
        }
        HkCommand::Factor(args) => {
            let g = lookup_group(&args.group)?;
            let config = parse_config_file(&args.config)?;
            for v in &config.values {
                if !g.contains(v) {
                    return Err(Error::NotInCarrier(format!(
                        "configuration entry {} is outside {}",
                        v.serialize()?,
                        g.id
                    )));
                }
            }
            let fc = face_coordinates(&config)?;
            let mut report = Report::new("hk-factor");
            report.metric("group", &g.id);
            report.metric("k", config.dim);
            for (mask, x) in fc.order.masks.iter().zip(&fc.coords) {
                report.metric(format!("x[{}]", mask_string(*mask, config.dim)), x.serialize()?);
            }
            Ok(Outcome::Report(report))
        }
    }
}

fn parse_parent(id: &str, degree: u32) -> Result<Nilmanifold> {
    if id == "heis" {
        return Ok(Nilmanifold::Heisenberg);
    }
    if let Some(rest) = id.strip_prefix('t') {
        if let Ok(dim) = rest.parse::<usize>() {
            if dim >= 1 && degree >= 1 {
                return Ok(Nilmanifold::Torus { dim, degree });
            }
        }
    }
    Err(Error::UnknownGroup(format!("unknown nilmanifold `{id}`")))
}

fn parse_nil_config(path: &str, parent: &Nilmanifold) -> Result<Vec<NilPoint>> {
    let text = read_input(path)?;
    nonempty_lines(&text).iter().map(|l| parse_nil_point(l, parent)).collect()
}

fn run_nil(cmd: &NilCommand) -> Result<Outcome> {
    match cmd {
        NilCommand::Check { parent, degree, config } => {
            let parent = parse_parent(parent, *degree)?;
            let points = parse_nil_config(config, &parent)?;
            let dim = infer_dim(points.len())?;
            let config = crate::cube::Config::new(dim, points)?;
            let verdict = nil_cube_membership(&config)?;
            let mut report = Report::new("nil-check");
            report.metric("k", dim);
            if let Some(lift) = &verdict.lift {
                for (w, v) in lift.values.iter().enumerate() {
                    report.metric(format!("lift[{}]", mask_string(w as u32, dim)), v.serialize()?);
                }
            }
            if let Some(violation) = &verdict.violation {
                report.push("not-a-cube", violation.clone());
            }
            Ok(Outcome::Report(report))
        }
        NilCommand::Complete { parent, degree, corner } => {
            let parent = parse_parent(parent, *degree)?;
            let points = parse_nil_config(corner, &parent)?;
            let dim = infer_dim(points.len() + 1)?;
            let top = nil_corner_complete(&parent, &points)?;
            let mut report = Report::new("nil-complete");
            report.metric("k", dim);
            report.metric("top", top.serialize());
            Ok(Outcome::Report(report))
        }
        NilCommand::Cocycle { x, y } => {
            let parse8 = |s: &str| -> Result<Vec<crate::group::Rat>> {
                let vals: Result<Vec<_>> = s.split(',').map(|p| parse_rat(p.trim())).collect();
                let vals = vals?;
                if vals.len() != 8 {
                    return Err(Error::Parse(format!("expected 8 rationals, got {}", vals.len())));
                }
                Ok(vals)
            };
            let value = heisenberg_cocycle(&parse8(x)?, &parse8(y)?)?;
            let mut report = Report::new("nil-cocycle");
            report.metric("kappa", crate::group::fmt_rat(&value));
            Ok(Outcome::Report(report))
        }
    }
}

fn load_space(arg: &SpaceFileArg) -> Result<FiniteCubespace> {
    let text = read_input(arg.file.as_deref().unwrap_or("-"))?;
    FiniteCubespace::parse_text(&text)
}

fn load_certified_space(arg: &SpaceFileArg) -> Result<(FiniteCubespace, Report)> {
    let mut x = load_space(arg)?;
    let report = certify_nilspace(&mut x)?;
    Ok((x, report))
}

fn parse_ds_group(id: &str) -> Result<Vec<u64>> {
    if let Some(rest) = id.strip_prefix('z') {
        let moduli: std::result::Result<Vec<u64>, _> =
            rest.split('x').map(|m| m.parse::<u64>()).collect();
        if let Ok(moduli) = moduli {
            if !moduli.is_empty() && moduli.iter().all(|&n| n >= 2) {
                return Ok(moduli);
            }
        }
    }
    Err(Error::UnknownGroup(format!("unknown abelian group `{id}`; expected zN or zNxM...")))
}

fn run_space(cmd: &SpaceCommand) -> Result<Outcome> {
    match cmd {
        SpaceCommand::Certify(arg) => {
            let (x, report) = load_certified_space(arg)?;
            let mut out = report;
            out.metric("points", x.num_points());
            Ok(Outcome::Report(out))
        }
        SpaceCommand::Uniqueness { k, space } => {
            let x = load_space(space)?;
            Ok(Outcome::Report(check_uniqueness(&x, *k)?))
        }
        SpaceCommand::Completion { k, space } => {
            let x = load_space(space)?;
            Ok(Outcome::Report(check_completion(&x, *k)?))
        }
        SpaceCommand::Tower(arg) => {
            let (x, cert) = load_certified_space(arg)?;
            if !cert.passed() {
                let mut out = cert;
                out.push("not-a-nilspace", "certification failed; no tower");
                return Ok(Outcome::Report(out));
            }
            let tower = canonical_tower(&Arc::new(x))?;
            let mut report = Report::new("tower");
            let points: Vec<String> =
                tower.iter().map(|l| l.quotient.num_points().to_string()).collect();
            report.metric("tower-points", format!("[{}]", points.join(", ")));
            for level in &tower {
                report.metric(format!("level.{}.points", level.level), level.quotient.num_points());
            }
            Ok(Outcome::Report(report))
        }
        SpaceCommand::StructureGroup { s, map, target, space } => {
            let (x, cert) = load_certified_space(space)?;
            if !cert.passed() {
                let mut out = cert;
                out.push("not-a-nilspace", "source certification failed");
                return Ok(Outcome::Report(out));
            }
            let source = Arc::new(x);
            let f = match (map, target) {
                (Some(map), Some(target)) => {
                    let (y, tcert) =
                        load_certified_space(&SpaceFileArg { file: Some(target.clone()) })?;
                    if !tcert.passed() {
                        let mut out = tcert;
                        out.push("not-a-nilspace", "target certification failed");
                        return Ok(Outcome::Report(out));
                    }
                    let text = read_input(map)?;
                    CubespaceMap::parse_text(Arc::clone(&source), Arc::new(y), &text)?
                }
                (None, None) => {
                    let point = Arc::new(FiniteCubespace::one_point(source.k_max()));
                    CubespaceMap::new(
                        Arc::clone(&source),
                        point,
                        vec![0; source.num_points()],
                    )?
                }
                _ => {
                    return Err(Error::Precondition(
                        "--map and --target must be given together".into(),
                    ))
                }
            };
            let a = structure_group(&f, *s)?;
            let mut report = Report::new("structure-group");
            report.metric("order", a.order());
            report.metric(
                "invariant-factors",
                a.invariant_factors
                    .iter()
                    .map(u64::to_string)
                    .collect::<Vec<_>>()
                    .join(","),
            );
            report.metric("isomorphism-type", a.isomorphism_type());
            Ok(Outcome::Report(report))
        }
        SpaceCommand::Fibration { map, target, k, space } => {
            let (x, cert) = load_certified_space(space)?;
            let (y, tcert) = load_certified_space(&SpaceFileArg { file: Some(target.clone()) })?;
            let source = Arc::new(x);
            let target = Arc::new(y);
            let text = read_input(map)?;
            let f = CubespaceMap::parse_text(Arc::clone(&source), Arc::clone(&target), &text)?;
            let up_to = k.unwrap_or_else(|| source.k_max().min(target.k_max()));
            let mut report = check_fibration(&f, up_to)?;
            report.metric("source-certified", cert.passed());
            report.metric("target-certified", tcert.passed());
            Ok(Outcome::Report(report))
        }
        SpaceCommand::MakeDs { group, s, kmax } => {
            let moduli = parse_ds_group(group)?;
            let x = build_ds_cubespace(&moduli, *s, kmax.unwrap_or(*s + 2))?;
            Ok(Outcome::Artifact(x.to_text()))
        }
    }
}

fn load_function(path: &str) -> Result<CyclicFunction> {
    CyclicFunction::parse_csv(&read_input(path)?)
}

fn run_gowers(cmd: &GowersCommand, seed: u64) -> Result<Outcome> {
    match cmd {
        GowersCommand::Norm { k, func, n, monte_carlo } => {
            let f = load_function(func)?;
            if let Some(n) = n {
                if *n != f.modulus {
                    return Err(Error::ModulusMismatch(*n, f.modulus));
                }
            }
            let mut report = Report::new("gowers-norm");
            report.metric("k", k);
            report.metric("modulus", f.modulus);
            let value = match monte_carlo {
                Some(samples) => {
                    report.metric("mode", "monte-carlo");
                    report.metric("samples", samples);
                    report.metric("seed", seed);
                    gowers_norm_mc(&f, *k, *samples, seed)?
                }
                None => {
                    report.metric("mode", "exhaustive");
                    gowers_norm(&f, *k)?
                }
            };
            report.metric("norm", format!("{value:.12}"));
            Ok(Outcome::Report(report))
        }
        GowersCommand::Inner { k, funcs, monte_carlo } => {
            if funcs.len() != 1usize << k {
                return Err(Error::Precondition(format!(
                    "U^{k} inner product needs {} functions, got {}",
                    1usize << k,
                    funcs.len()
                )));
            }
            let fs: Result<Vec<CyclicFunction>> =
                funcs.iter().map(|p| load_function(p)).collect();
            let fs = fs?;
            let refs: Vec<&CyclicFunction> = fs.iter().collect();
            let mut report = Report::new("gowers-inner");
            report.metric("k", k);
            report.metric("modulus", fs[0].modulus);
            let value = match monte_carlo {
                Some(samples) => {
                    report.metric("mode", "monte-carlo");
                    report.metric("samples", samples);
                    report.metric("seed", seed);
                    gowers_inner_product_mc(&refs, *samples, seed)?
                }
                None => {
                    report.metric("mode", "exhaustive");
                    gowers_inner_product(&refs)?
                }
            };
            report.metric("re", format!("{:.12}", value.re));
            report.metric("im", format!("{:.12}", value.im));
            Ok(Outcome::Report(report))
        }
        GowersCommand::Nilseq { alpha, beta, n } => {
            let alpha = parse_rat(alpha)?;
            let beta = parse_rat(beta)?;
            let p = PolySequence::Heisenberg {
                a1: alpha,
                a0: crate::group::Rat::zero(),
                b1: beta,
                b0: crate::group::Rat::zero(),
                c2: crate::group::Rat::zero(),
                c1: crate::group::Rat::zero(),
                c0: crate::group::Rat::zero(),
            };
            let f = nilsequence(&Nilmanifold::Heisenberg, &heis_vertical_character, &p, *n)?;
            Ok(Outcome::Artifact(f.to_csv()))
        }
        GowersCommand::Correlate { func, with } => {
            let f = load_function(func)?;
            let g = load_function(with)?;
            let value = correlation(&f, &g)?;
            let mut report = Report::new("gowers-correlate");
            report.metric("modulus", f.modulus);
            report.metric("re", format!("{:.12}", value.re));
            report.metric("im", format!("{:.12}", value.im));
            report.metric("abs", format!("{:.12}", value.norm().abs()));
            Ok(Outcome::Report(report))
        }
    }
}
