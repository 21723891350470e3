use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use multiscale_core::arrangements::{
    betti_blowup_oracle, blowup_plan, catalog, BlowupPolicy, CatalogKind, WonderfulModel,
};
use multiscale_core::chow::{BettiRecord, ChowRing, RingModel};
use multiscale_core::partitions::enumerate_partitions;
use multiscale_core::strata::{strata_enumerate, tree_from_chain, ChainStratum, Space};
use multiscale_core::{Error, SetPartition};
use multiscale_cli::suites::{self, Suite};
use serde::Serialize;
use serde_json::json;

const DEFAULT_MAX_N: usize = 6;

/// Combinatorics of multiscale differentials, multiscale lines and M_{0,n+1}.
///
/// Exit status: 0 on success, 1 when a verification suite fails or an
/// internal cross-check breaks, 2 on usage errors (bad flags, malformed
/// input, n beyond the guardrail).
#[derive(Debug, Parser)]
#[command(name = "multiscale", version)]
struct Cli {
    /// Largest ground-set size any command accepts.
    #[arg(long, global = true, env = "MULTISCALE_MAX_N", default_value_t = DEFAULT_MAX_N)]
    max_n: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SpaceArg {
    #[value(name = "B")]
    B,
    #[value(name = "A")]
    A,
}

impl From<SpaceArg> for Space {
    fn from(s: SpaceArg) -> Space {
        match s {
            SpaceArg::B => Space::B,
            SpaceArg::A => Space::A,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    /// Wonderful presentation of B_n.
    #[value(name = "B")]
    B,
    /// Keel-type presentation of M_{0,n+1}.
    #[value(name = "M0")]
    M0,
    /// Augmented presentation of A_n.
    #[value(name = "A")]
    A,
}

impl From<ModelArg> for RingModel {
    fn from(m: ModelArg) -> RingModel {
        match m {
            ModelArg::B => RingModel::Wonderful,
            ModelArg::M0 => RingModel::Keel,
            ModelArg::A => RingModel::Augmented,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CatalogArg {
    DiagInf,
    PolyInf,
    PolyInfNoTop,
    Poly,
    PolyUnionPolyInf,
    BottomPoint,
}

impl From<CatalogArg> for CatalogKind {
    fn from(c: CatalogArg) -> CatalogKind {
        match c {
            CatalogArg::DiagInf => CatalogKind::DiagInf,
            CatalogArg::PolyInf => CatalogKind::PolyInf,
            CatalogArg::PolyInfNoTop => CatalogKind::PolyInfNoTop,
            CatalogArg::Poly => CatalogKind::PolyOnly,
            CatalogArg::PolyUnionPolyInf => CatalogKind::PolyUnionPolyInf,
            CatalogArg::BottomPoint => CatalogKind::BottomPoint,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WonderfulArg {
    /// B_n = Y_n from Poly_inf without the top diagonal.
    #[value(name = "B")]
    B,
    /// M_{0,n+1} from Diag_inf.
    #[value(name = "M0")]
    M0,
    /// A_n from Poly_inf.
    #[value(name = "A")]
    A,
    /// Blowup of the bottom point.
    BlowupBottom,
    /// The P^1-bundle from Poly.
    #[value(name = "P")]
    P,
    /// The resolution from Poly and Poly_inf.
    #[value(name = "R")]
    R,
}

impl From<WonderfulArg> for WonderfulModel {
    fn from(w: WonderfulArg) -> WonderfulModel {
        match w {
            WonderfulArg::B => WonderfulModel::Y,
            WonderfulArg::M0 => WonderfulModel::M0,
            WonderfulArg::A => WonderfulModel::A,
            WonderfulArg::BlowupBottom => WonderfulModel::BlowupBottom,
            WonderfulArg::P => WonderfulModel::P,
            WonderfulArg::R => WonderfulModel::R,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    IncreasingDim,
    DiagThenEx,
}

impl From<PolicyArg> for BlowupPolicy {
    fn from(p: PolicyArg) -> BlowupPolicy {
        match p {
            PolicyArg::IncreasingDim => BlowupPolicy::IncreasingDim,
            PolicyArg::DiagThenEx => BlowupPolicy::DiagThenEx,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Enumerate the partition lattice L_n.
    Partitions {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// List the subspaces of an arrangement catalog.
    Catalog {
        #[arg(long, value_enum)]
        kind: CatalogArg,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Ordered blowup centers with prefix validity.
    Plan {
        #[arg(long, value_enum, ignore_case = true)]
        model: WonderfulArg,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = PolicyArg::IncreasingDim)]
        policy: PolicyArg,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Enumerate boundary strata as chains, with closure covers.
    Strata {
        #[arg(long, value_enum, ignore_case = true)]
        space: SpaceArg,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Dual level tree of a chain such as "123|45<12|3|45", as DOT.
    Tree {
        #[arg(long, value_enum, ignore_case = true)]
        space: SpaceArg,
        /// Coarsest-first chain joined by '<'; empty for the open stratum.
        #[arg(long, allow_hyphen_values = true)]
        chain: String,
        /// Ground-set size; inferred from the chain when omitted.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
    },
    /// Graded ranks of a Chow ring presentation.
    Betti {
        #[arg(long, value_enum, ignore_case = true)]
        model: ModelArg,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Betti numbers from blowup accounting.
    Oracle {
        #[arg(long, value_enum, ignore_case = true)]
        model: WonderfulArg,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = PolicyArg::IncreasingDim)]
        policy: PolicyArg,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Intersection pairing CH^k x CH^(d-k) -> Z.
    Pairing {
        #[arg(long, value_enum, ignore_case = true)]
        model: ModelArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Normal form of a ring element such as "x[12|34] * x[12|3|4]".
    Reduce {
        #[arg(long, value_enum, ignore_case = true)]
        model: ModelArg,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        expr: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run named verification suites.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        n: usize,
        /// Seed for the randomized checks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

enum Failure {
    Usage(String),
    Verification(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Internal(_) => Failure::Internal(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<String, Failure>;

fn check_n(n: usize, max_n: usize) -> Result<(), Failure> {
    if n > max_n {
        return Err(Failure::Usage(format!(
            "capacity exceeded: n = {n} is above max_n = {max_n} (raise it with --max-n or MULTISCALE_MAX_N)"
        )));
    }
    if n < 2 {
        return Err(Failure::Usage(format!("n must be at least 2, got {n}")));
    }
    Ok(())
}

fn unsupported(command: &str, format: Format, allowed: &[Format]) -> Failure {
    let names: Vec<String> = allowed
        .iter()
        .map(|f| f.to_possible_value().expect("no skipped variants").get_name().to_string())
        .collect();
    Failure::Usage(format!(
        "{command} does not support --format {}; use one of {}",
        format.to_possible_value().expect("no skipped variants").get_name(),
        names.join(", ")
    ))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("records serialize");
    s.push('\n');
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn partitions_cmd(n: usize, format: Format) -> Outcome {
    let all = enumerate_partitions(n)?;
    Ok(match format {
        Format::Text => all.iter().map(|p| format!("{p}\n")).collect(),
        Format::Json => to_json(&json!({
            "schema": "multiscale.partitions/1",
            "n": n,
            "count": all.len(),
            "partitions": all.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut out = String::from("index,partition,blocks,rank\n");
            for (i, p) in all.iter().enumerate() {
                let _ = writeln!(out, "{i},{},{},{}", csv_field(&p.to_string()), p.block_count(), p.rank());
            }
            out
        }
        Format::Dot => return Err(unsupported("partitions", format, &[Format::Text, Format::Json, Format::Csv])),
    })
}

fn catalog_cmd(kind: CatalogKind, n: usize, format: Format) -> Outcome {
    let cat = catalog(n, kind)?;
    Ok(match format {
        Format::Text => {
            let mut out = format!("{kind:?} for n = {n} in {:?} ({} members)\n", cat.ambient(), cat.len());
            for m in cat.members() {
                let _ = writeln!(out, "{m}\tdim {}\tcodim {}", m.dim(), m.codim_in(cat.ambient()));
            }
            out
        }
        Format::Json => to_json(&cat.to_record()),
        Format::Csv => {
            let mut out = String::from("index,subspace,dim,codim\n");
            for (i, m) in cat.members().iter().enumerate() {
                let _ = writeln!(out, "{i},{},{},{}", csv_field(&m.to_string()), m.dim(), m.codim_in(cat.ambient()));
            }
            out
        }
        Format::Dot => return Err(unsupported("catalog", format, &[Format::Text, Format::Json, Format::Csv])),
    })
}

fn plan_cmd(model: WonderfulModel, n: usize, policy: BlowupPolicy, format: Format) -> Outcome {
    let plan = blowup_plan(&catalog(n, model.catalog_kind())?, policy)?;
    let rec = plan.to_record();
    Ok(match format {
        Format::Text => {
            let mut out = format!("criterion: {}\n", rec.prefix_criterion);
            for (i, (c, ok)) in plan.centers().zip(plan.prefix_valid()).enumerate() {
                let _ = writeln!(out, "{}\t{c}\tdim {}\tprefix {}", i + 1, c.dim(), if *ok { "valid" } else { "invalid" });
            }
            out
        }
        Format::Json => to_json(&rec),
        Format::Csv => {
            let mut out = String::from("step,center,dim,prefix_valid\n");
            for (i, (c, ok)) in plan.centers().zip(plan.prefix_valid()).enumerate() {
                let _ = writeln!(out, "{},{},{},{ok}", i + 1, csv_field(&c.to_string()), c.dim());
            }
            out
        }
        Format::Dot => return Err(unsupported("plan", format, &[Format::Text, Format::Json, Format::Csv])),
    })
}

fn strata_cmd(space: Space, n: usize, format: Format) -> Outcome {
    let strata = strata_enumerate(space, n)?;
    // covers[i]: strata of codimension one more lying in the closure of i
    let covers: Vec<Vec<usize>> = strata
        .iter()
        .map(|s| {
            (0..strata.len())
                .filter(|&j| strata[j].codim() == s.codim() + 1 && strata[j].is_face_of(s))
                .collect()
        })
        .collect();
    let name = |s: &ChainStratum| if s.codim() == 0 { "open".to_string() } else { s.to_string() };
    Ok(match format {
        Format::Text => {
            let mut out = format!("{} strata of {space}_{n}\n", strata.len());
            for s in &strata {
                let _ = writeln!(out, "{}\t{}", s.codim(), name(s));
            }
            out
        }
        Format::Json => {
            let items: Vec<_> = strata
                .iter()
                .zip(&covers)
                .map(|(s, c)| json!({"chain": s.to_string(), "codim": s.codim(), "boundary": c}))
                .collect();
            to_json(&json!({
                "schema": "multiscale.strata/1",
                "space": space.to_string(),
                "n": n,
                "count": strata.len(),
                "strata": items,
            }))
        }
        Format::Csv => {
            let mut out = String::from("index,codim,chain,boundary\n");
            for (i, (s, c)) in strata.iter().zip(&covers).enumerate() {
                let b: Vec<String> = c.iter().map(|j| j.to_string()).collect();
                let _ = writeln!(out, "{i},{},{},{}", s.codim(), csv_field(&s.to_string()), b.join(" "));
            }
            out
        }
        Format::Dot => {
            let mut out = String::from("digraph strata {\n  rankdir=TB;\n");
            for (i, s) in strata.iter().enumerate() {
                let _ = writeln!(out, "  s{i} [label=\"{}\"];", name(s));
            }
            for (i, c) in covers.iter().enumerate() {
                for j in c {
                    let _ = writeln!(out, "  s{i} -> s{j};");
                }
            }
            out.push_str("}\n");
            out
        }
    })
}

fn tree_cmd(space: Space, chain: &str, n: Option<usize>, max_n: usize, format: Format) -> Outcome {
    let inferred = match chain.split('<').next().map(str::trim) {
        Some(first) if !first.is_empty() => Some(first.parse::<SetPartition>()?.n()),
        _ => None,
    };
    let n = match (n, inferred) {
        (Some(a), Some(b)) if a != b => {
            return Err(Failure::Usage(format!("--n {a} disagrees with the chain, which lives on 1..{b}")))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(Failure::Usage("--n is required for the open stratum".into())),
    };
    check_n(n, max_n)?;
    let stratum = ChainStratum::parse(space, n, chain)?;
    let tree = tree_from_chain(&stratum)?;
    Ok(match format {
        Format::Dot => tree.to_dot(),
        Format::Json => {
            let vertices: Vec<_> = tree
                .vertices()
                .iter()
                .map(|v| {
                    json!({
                        "block": multiscale_core::partitions::subset_elements(v.label),
                        "level": -(v.depth as i64),
                        "parent": v.parent,
                    })
                })
                .collect();
            let marks: Vec<usize> = (1..=n).map(|i| tree.mark_vertex(i)).collect();
            to_json(&json!({
                "schema": "multiscale.tree/1",
                "space": space.to_string(),
                "n": n,
                "chain": stratum.to_string(),
                "vertices": vertices,
                "marks": marks,
            }))
        }
        _ => return Err(unsupported("tree", format, &[Format::Dot, Format::Json])),
    })
}

fn betti_output(rec: &BettiRecord, format: Format, command: &str) -> Outcome {
    Ok(match format {
        Format::Text => {
            let parts: Vec<String> = rec.ranks.iter().map(|r| r.to_string()).collect();
            format!("({})\n", parts.join(", "))
        }
        Format::Json => to_json(rec),
        Format::Csv => rec.to_csv(),
        Format::Dot => return Err(unsupported(command, format, &[Format::Text, Format::Json, Format::Csv])),
    })
}

fn betti_cmd(model: RingModel, n: usize, format: Format) -> Outcome {
    let ring = ChowRing::build(n, model)?;
    betti_output(&BettiRecord::new(model.code(), n, &ring.betti_table()), format, "betti")
}

fn oracle_cmd(model: WonderfulArg, n: usize, policy: BlowupPolicy, format: Format) -> Outcome {
    let wm: WonderfulModel = model.into();
    let plan = blowup_plan(&catalog(n, wm.catalog_kind())?, policy)?;
    let table = betti_blowup_oracle(&plan)?;
    let label = model.to_possible_value().expect("no skipped variants").get_name().to_string();
    betti_output(&BettiRecord::new(format!("oracle:{label}"), n, &table), format, "oracle")
}

fn pairing_cmd(model: RingModel, n: usize, k: usize, format: Format) -> Outcome {
    let ring = ChowRing::build(n, model)?;
    let m = ring.pairing_matrix(k)?;
    Ok(match format {
        Format::Text => {
            let mut out = format!(
                "pairing CH^{k} x CH^{} for {model} n = {n}: {}x{}, rank {}\n",
                ring.top_degree() - k,
                m.rows.len(),
                m.cols.len(),
                m.rank()
            );
            for row in &m.entries {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(out, "{}", cells.join(" "));
            }
            out
        }
        Format::Json => to_json(&m.to_record()),
        Format::Csv => m.to_csv(),
        Format::Dot => return Err(unsupported("pairing", format, &[Format::Text, Format::Json, Format::Csv])),
    })
}

fn reduce_cmd(model: RingModel, n: usize, expr: &str, format: Format) -> Outcome {
    let ring = ChowRing::build(n, model)?;
    let p = ring.presentation();
    let e = p.parse_element(expr)?;
    let nf = ring.normal_form(&e)?;
    Ok(match format {
        Format::Text => format!("{}\n", p.format_element(&nf)),
        Format::Json => to_json(&json!({
            "schema": "multiscale.element/1",
            "model": model.code(),
            "n": n,
            "input": p.format_element(&e),
            "normal_form": p.format_element(&nf),
        })),
        _ => return Err(unsupported("reduce", format, &[Format::Text, Format::Json])),
    })
}

fn verify_cmd(suite: Suite, n: usize, seed: u64, format: Format) -> Outcome {
    let reports = suites::run(suite, n, seed)?;
    let text = match format {
        Format::Text => suites::render_text(&reports),
        Format::Json => to_json(&json!({
            "schema": "multiscale.verify/1",
            "n": n,
            "seed": seed,
            "passed": reports.iter().all(|r| r.passed),
            "suites": reports,
        })),
        _ => return Err(unsupported("verify", format, &[Format::Text, Format::Json])),
    };
    if reports.iter().all(|r| r.passed) {
        Ok(text)
    } else {
        Err(Failure::Verification(text))
    }
}

fn run(cli: Cli) -> Outcome {
    let max_n = cli.max_n;
    match cli.command {
        Command::Partitions { n, format } => {
            check_n(n, max_n)?;
            partitions_cmd(n, format)
        }
        Command::Catalog { kind, n, format } => {
            check_n(n, max_n)?;
            catalog_cmd(kind.into(), n, format)
        }
        Command::Plan { model, n, policy, format } => {
            check_n(n, max_n)?;
            plan_cmd(model.into(), n, policy.into(), format)
        }
        Command::Strata { space, n, format } => {
            check_n(n, max_n)?;
            strata_cmd(space.into(), n, format)
        }
        Command::Tree { space, chain, n, format } => tree_cmd(space.into(), &chain, n, max_n, format),
        Command::Betti { model, n, format } => {
            check_n(n, max_n)?;
            betti_cmd(model.into(), n, format)
        }
        Command::Oracle { model, n, policy, format } => {
            check_n(n, max_n)?;
            oracle_cmd(model, n, policy.into(), format)
        }
        Command::Pairing { model, n, k, format } => {
            check_n(n, max_n)?;
            pairing_cmd(model.into(), n, k, format)
        }
        Command::Reduce { model, n, expr, format } => {
            check_n(n, max_n)?;
            reduce_cmd(model.into(), n, &expr, format)
        }
        Command::Verify { suite, n, seed, format } => {
            check_n(n, max_n)?;
            verify_cmd(suite, n, seed, format)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Verification(report)) => {
            print!("{report}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
