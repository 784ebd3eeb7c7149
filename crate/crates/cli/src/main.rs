//! Batch command-line front end: JSON in, JSON (or a report table) out.
//! Every stochastic subcommand takes an explicit seed and echoes its
//! full configuration, so equal invocations produce identical bytes.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde_json::json;

use dforest::branching::{self, OffspringLaw};
use dforest::coding::{decode, encode};
use dforest::cyclic;
use dforest::enumeration::{self, IndegreeCensus};
use dforest::exact::{format_ratio, format_rational, rational_to_f64};
use dforest::forest::Signature;
use dforest::lagrange;
use dforest::rng::SplitMix64;
use dforest::schema;
use dforest::simulate::{SimCaps, SimOutcome, Simulator};
use dforest::verify::{self, VerifyConfig};

#[derive(Parser)]
#[command(
    name = "dforest",
    about = "Exact combinatorics of d-type plane forests: coding, cyclic counts, progeny laws, enumeration, inversion",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct IoArgs {
    /// Input file (defaults to stdin).
    #[arg(short, long)]
    input: Option<PathBuf>,
    /// Output file (defaults to stdout).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a forest JSON document into its coding sequence.
    Encode(IoArgs),
    /// Decode a coding JSON document (with roots) back into a forest.
    Decode {
        #[command(flatten)]
        io: IoArgs,
        /// Root type sequence, comma separated (overrides the document).
        #[arg(long)]
        roots: Option<String>,
    },
    /// Classify an offspring law: irreducibility, degeneracy, regime.
    Classify {
        /// Law JSON file.
        #[arg(long)]
        law: PathBuf,
    },
    /// Exact progeny-law probability; omit --k for the marginal law.
    ProgenyLaw {
        #[arg(long)]
        law: PathBuf,
        /// Root counts per type, e.g. "1,0".
        #[arg(long)]
        roots: String,
        /// Progeny totals per type, e.g. "3,2".
        #[arg(long)]
        n: String,
        /// Full d*d count matrix, row major, e.g. "-1,1,0,-1".
        #[arg(long, allow_hyphen_values = true)]
        k: Option<String>,
    },
    /// Sample forests and tabulate event frequencies.
    Simulate {
        #[arg(long)]
        law: PathBuf,
        /// Root type sequence, e.g. "1,2".
        #[arg(long)]
        roots: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        replicas: usize,
        /// Per-replica vertex cap; larger forests are truncated.
        #[arg(long, default_value_t = 10_000)]
        cap: usize,
    },
    /// Evaluate a forest-counting closed form on a signature document.
    CountForests {
        /// plane | labeled-indegree | labeled-edge-types | injective |
        /// labeled-census | unlabeled-census | single-type-degrees
        #[arg(long)]
        formula: String,
        /// Signature JSON file.
        #[arg(long)]
        sig: PathBuf,
        /// Also run the exhaustive oracle and report agreement.
        #[arg(long)]
        oracle: bool,
    },
    /// Brute-force good-shift count, endpoint determinant and the
    /// elementary-forest sum, side by side.
    CyclicCount {
        #[command(flatten)]
        io: IoArgs,
        /// Root counts per type, e.g. "1,0".
        #[arg(long)]
        r: String,
    },
    /// Coefficient of the progeny generating system three ways.
    LagrangeCoeff {
        #[arg(long)]
        law: PathBuf,
        /// Root counts per type.
        #[arg(long)]
        roots: String,
        /// Exponent vector, all entries positive.
        #[arg(long)]
        n: String,
    },
    /// Run the oracle suite and print a pass/fail table.
    Verify {
        /// Shrink the exhaustive sweeps to this cap (full suite if
        /// omitted).
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn read_input(path: &Option<PathBuf>) -> Result<String, String> {
    match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| format!("reading {}: {e}", p.display())),
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| format!("reading stdin: {e}"))?;
            Ok(buf)
        }
    }
}

fn write_output(path: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("writing {}: {e}", p.display())),
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| format!("writing stdout: {e}"))
        }
    }
}

fn read_law(path: &PathBuf) -> Result<OffspringLaw, String> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?;
    schema::law_from_json(&text).map_err(|e| e.to_string())
}

fn parse_vec_i64(text: &str) -> Result<Vec<i64>, String> {
    text.split(',')
        .map(|p| p.trim().parse::<i64>().map_err(|_| format!("bad integer list {text:?}")))
        .collect()
}

fn parse_vec_usize(text: &str) -> Result<Vec<usize>, String> {
    text.split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad integer list {text:?}")))
        .collect()
}

fn parse_matrix(text: &str, d: usize) -> Result<Vec<Vec<i64>>, String> {
    let flat = parse_vec_i64(text)?;
    if flat.len() != d * d {
        return Err(format!("matrix needs {} entries, got {}", d * d, flat.len()));
    }
    Ok(flat.chunks(d).map(|row| row.to_vec()).collect())
}

/// Exit code 1 marks a verification mismatch, 2 a usage or input error.
fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(verified) => {
            if verified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<bool, String> {
    match command {
        Command::Encode(io) => {
            let forest = schema::forest_from_json(&read_input(&io.input)?)
                .map_err(|e| e.to_string())?;
            let x = encode(&forest);
            let roots = forest.root_colors();
            let json = schema::coding_to_json(&x, Some(&roots));
            write_output(&io.output, &format!("{json}\n"))?;
            Ok(true)
        }
        Command::Decode { io, roots } => {
            let (x, doc_roots) =
                schema::coding_from_json(&read_input(&io.input)?).map_err(|e| e.to_string())?;
            let colors = match roots {
                Some(text) => parse_vec_usize(&text)?,
                None => doc_roots
                    .ok_or("the document carries no roots; pass --roots".to_string())?,
            };
            let mut counts = vec![0i64; x.d()];
            for &c in &colors {
                if c == 0 || c > x.d() {
                    return Err(format!("root color {c} outside 1..={}", x.d()));
                }
                counts[c - 1] += 1;
            }
            let forest = decode(&x, &colors, &counts).map_err(|e| e.to_string())?;
            write_output(&io.output, &format!("{}\n", schema::forest_to_json(&forest)))?;
            Ok(true)
        }
        Command::Classify { law } => {
            let law = read_law(&law)?;
            let c = branching::classify(&law).map_err(|e| e.to_string())?;
            let mean: Vec<Vec<String>> = c
                .mean
                .iter()
                .map(|row| row.iter().map(format_rational).collect())
                .collect();
            let doc = json!({
                "schema": "dforest/classification/1",
                "irreducible": c.irreducible,
                "degenerate": c.degenerate,
                "regime": c.regime.to_string(),
                "rho_lower": format_rational(&c.rho.0),
                "rho_upper": format_rational(&c.rho.1),
                "rho_lower_decimal": rational_to_f64(&c.rho.0),
                "rho_upper_decimal": rational_to_f64(&c.rho.1),
                "mean_matrix": mean,
            });
            println!("{doc}");
            Ok(true)
        }
        Command::ProgenyLaw { law, roots, n, k } => {
            let law = read_law(&law)?;
            let d = law.d();
            let r = parse_vec_i64(&roots)?;
            let totals = parse_vec_i64(&n)?;
            let (p, k_echo) = match k {
                Some(text) => {
                    let matrix = parse_matrix(&text, d)?;
                    let p = branching::progeny_law(&law, &r, &totals, &matrix)
                        .map_err(|e| e.to_string())?;
                    (p, Some(matrix))
                }
                None => {
                    let p = branching::marginal_progeny_law(&law, &r, &totals)
                        .map_err(|e| e.to_string())?;
                    (p, None)
                }
            };
            let doc = json!({
                "schema": "dforest/probability/1",
                "roots": r,
                "n": totals,
                "k": k_echo,
                "exact": format_ratio(&p),
                "decimal": rational_to_f64(&p),
            });
            println!("{doc}");
            Ok(true)
        }
        Command::Simulate { law, roots, seed, replicas, cap } => {
            let law = read_law(&law)?;
            let colors = parse_vec_usize(&roots)?;
            let sim = Simulator::new(&law).map_err(|e| e.to_string())?;
            let caps = SimCaps { max_vertices: cap };
            let mut events: HashMap<(Vec<i64>, Vec<Vec<i64>>), u64> = HashMap::new();
            let mut truncated = 0u64;
            for rep in 0..replicas {
                let mut rng = SplitMix64::stream(seed, rep as u64);
                match sim.sample(&colors, caps, &mut rng).map_err(|e| e.to_string())? {
                    SimOutcome::Forest(f) => {
                        let sig = f.signature();
                        *events.entry((sig.n, sig.k)).or_insert(0) += 1;
                    }
                    SimOutcome::Truncated { .. } => truncated += 1,
                }
            }
            let mut rows: Vec<_> = events.into_iter().collect();
            rows.sort();
            let table: Vec<serde_json::Value> = rows
                .into_iter()
                .map(|((n, k), count)| {
                    json!({
                        "n": n,
                        "k": k,
                        "count": count,
                        "frequency": count as f64 / replicas as f64,
                    })
                })
                .collect();
            let doc = json!({
                "schema": "dforest/simulation/1",
                "seed": seed,
                "replicas": replicas,
                "cap": cap,
                "roots": colors,
                "truncated": truncated,
                "events": table,
            });
            println!("{doc}");
            Ok(true)
        }
        Command::CountForests { formula, sig, oracle } => {
            let text = std::fs::read_to_string(&sig)
                .map_err(|e| format!("reading {}: {e}", sig.display()))?;
            let doc = schema::signature_doc_from_json(&text).map_err(|e| e.to_string())?;
            let signature = schema::signature_from_doc(&doc).map_err(|e| e.to_string())?;
            let count = evaluate_formula(&formula, &signature, &doc).map_err(|e| e.to_string())?;
            let oracle_count = if oracle {
                Some(run_oracle(&formula, &signature, &doc)?)
            } else {
                None
            };
            let agreement = oracle_count.as_ref().map(|o| o == &count);
            let out = json!({
                "schema": "dforest/count/1",
                "formula": formula,
                "count": count.to_string(),
                "oracle": oracle_count.map(|o| o.to_string()),
                "agreement": agreement,
            });
            println!("{out}");
            Ok(agreement.unwrap_or(true))
        }
        Command::CyclicCount { io, r } => {
            let (x, _) =
                schema::coding_from_json(&read_input(&io.input)?).map_err(|e| e.to_string())?;
            let roots = parse_vec_i64(&r)?;
            let n = x.lengths();
            let brute = cyclic::count_good_shifts(&roots, &x, &n).map_err(|e| e.to_string())?;
            let det = cyclic::cyclic_determinant(&x, &n).map_err(|e| e.to_string())?;
            let endpoint = x.endpoint_matrix();
            let sum =
                cyclic::elementary_forest_sum(&endpoint, &roots).map_err(|e| e.to_string())?;
            let agreement =
                BigInt::from(brute) == det && det == sum;
            let doc = json!({
                "schema": "dforest/cyclic-count/1",
                "r": roots,
                "lengths": n,
                "brute_force": brute.to_string(),
                "determinant": det.to_string(),
                "elementary_sum": sum.to_string(),
                "agreement": agreement,
            });
            println!("{doc}");
            Ok(agreement)
        }
        Command::LagrangeCoeff { law, roots, n } => {
            let law = read_law(&law)?;
            let r = parse_vec_i64(&roots)?;
            let totals = parse_vec_i64(&n)?;
            let lhs = lagrange::fixed_point_coefficient(&law, &r, &totals)
                .map_err(|e| e.to_string())?;
            let rhs = lagrange::arborescent_coefficient(&law, &r, &totals)
                .map_err(|e| e.to_string())?;
            let prob = branching::marginal_progeny_law(&law, &r, &totals)
                .map_err(|e| e.to_string())?;
            let equal = lhs == rhs && rhs == prob;
            let doc = json!({
                "schema": "dforest/inversion/1",
                "roots": r,
                "n": totals,
                "fixed_point": format_ratio(&lhs),
                "arborescent": format_ratio(&rhs),
                "progeny_law": format_ratio(&prob),
                "decimal": rational_to_f64(&lhs),
                "equal": equal,
            });
            println!("{doc}");
            Ok(equal)
        }
        Command::Verify { cap, seed } => {
            let cfg = match cap {
                Some(c) => VerifyConfig::with_cap(c, seed),
                None => VerifyConfig { seed, ..VerifyConfig::default() },
            };
            let reports = verify::run_all(&cfg);
            print!("{}", verify::render_report(&cfg, &reports));
            Ok(verify::all_passed(&reports))
        }
    }
}

fn evaluate_formula(
    formula: &str,
    sig: &Signature,
    doc: &schema::SignatureDoc,
) -> dforest::Result<BigInt> {
    match formula {
        "plane" => enumeration::count_plane_forests(sig),
        "labeled-indegree" => {
            let tuple = doc.indegree_tuple.clone().ok_or_else(|| {
                dforest::Error::Parse("signature document lacks indegree_tuple".into())
            })?;
            enumeration::count_labeled_by_indegree(sig, &tuple)
        }
        "labeled-edge-types" => enumeration::count_labeled_by_edge_types(sig),
        "injective" => enumeration::count_injective(sig),
        "labeled-census" => {
            let census = census_from_doc(doc)?;
            enumeration::count_labeled_by_census(sig, &census)
        }
        "unlabeled-census" => {
            let census = census_from_doc(doc)?;
            enumeration::count_unlabeled_by_census(sig, &census)
        }
        "single-type-degrees" => {
            let degrees = degrees_from_doc(sig, doc)?;
            enumeration::count_single_type_by_degrees(&degrees)
        }
        other => Err(dforest::Error::Parse(format!("unknown formula {other:?}"))),
    }
}

fn degrees_from_doc(
    sig: &Signature,
    doc: &schema::SignatureDoc,
) -> dforest::Result<Vec<i64>> {
    let degrees = doc
        .degrees
        .clone()
        .ok_or_else(|| dforest::Error::Parse("signature document lacks degrees".into()))?;
    if sig.d != 1 || degrees.len() as i64 != sig.n[0] {
        return Err(dforest::Error::Parse(
            "degree sequences need a one-type signature with one entry per vertex".into(),
        ));
    }
    let total: i64 = degrees.iter().sum();
    if sig.n[0] - total != sig.r[0] {
        return Err(dforest::Error::Parse(
            "degree sum is inconsistent with the root count".into(),
        ));
    }
    Ok(degrees)
}

fn census_from_doc(doc: &schema::SignatureDoc) -> dforest::Result<IndegreeCensus> {
    let entries = doc
        .census
        .as_ref()
        .ok_or_else(|| dforest::Error::Parse("signature document lacks census".into()))?;
    Ok(IndegreeCensus {
        entries: entries
            .iter()
            .map(|e| (e.color.wrapping_sub(1), e.offspring.clone(), e.count))
            .collect(),
    })
}

fn run_oracle(
    formula: &str,
    sig: &Signature,
    doc: &schema::SignatureDoc,
) -> Result<BigInt, String> {
    match formula {
        "plane" => {
            let forests = enumeration::plane_forests_matching(sig).map_err(|e| e.to_string())?;
            Ok(BigInt::from(forests.len()))
        }
        "unlabeled-census" => {
            let census = census_from_doc(doc).map_err(|e| e.to_string())?;
            let forests = enumeration::plane_forests_matching(sig).map_err(|e| e.to_string())?;
            let mut count = 0u64;
            for f in forests {
                if census_of_forest(&f) == normalized_census(&census) {
                    count += 1;
                }
            }
            Ok(BigInt::from(count))
        }
        "single-type-degrees" => {
            let degrees = degrees_from_doc(sig, doc).map_err(|e| e.to_string())?;
            let tally = enumeration::tally_labeled_forests(1, &sig.n);
            let mut count = 0u64;
            for ((_, _, tuple), c) in &tally.by_indegree {
                if tuple[0][0] == degrees {
                    count += c;
                }
            }
            Ok(BigInt::from(count))
        }
        "labeled-indegree" | "labeled-edge-types" | "injective" | "labeled-census" => {
            let tally = enumeration::tally_labeled_forests(sig.d, &sig.n);
            let key = (sig.r.clone(), sig.k.clone());
            let count = match formula {
                "labeled-edge-types" => tally.by_class.get(&key).copied().unwrap_or(0),
                "injective" => tally.injective.get(&key).copied().unwrap_or(0),
                "labeled-indegree" => {
                    let tuple = doc
                        .indegree_tuple
                        .clone()
                        .ok_or("signature document lacks indegree_tuple".to_string())?;
                    tally
                        .by_indegree
                        .get(&(sig.r.clone(), sig.k.clone(), tuple))
                        .copied()
                        .unwrap_or(0)
                }
                _ => {
                    let census = census_from_doc(doc).map_err(|e| e.to_string())?;
                    tally
                        .by_census
                        .get(&(sig.r.clone(), sig.k.clone(), normalized_census(&census)))
                        .copied()
                        .unwrap_or(0)
                }
            };
            Ok(BigInt::from(count))
        }
        other => Err(format!("no oracle for formula {other:?}")),
    }
}

fn normalized_census(census: &IndegreeCensus) -> Vec<(usize, Vec<i64>, i64)> {
    let mut entries: Vec<_> =
        census.entries.iter().filter(|(_, _, c)| *c != 0).cloned().collect();
    entries.sort();
    entries
}

fn census_of_forest(f: &dforest::TypedForest) -> Vec<(usize, Vec<i64>, i64)> {
    let mut map: std::collections::BTreeMap<(usize, Vec<i64>), i64> =
        std::collections::BTreeMap::new();
    for v in 0..f.len() {
        let u: Vec<i64> = f.progeny(v).iter().map(|&x| x as i64).collect();
        *map.entry((f.color(v) - 1, u)).or_insert(0) += 1;
    }
    map.into_iter().map(|((i, u), c)| (i, u, c)).collect()
}
