//! `cfm` command line: JSON and flag input, JSON or TSV output.
//!
//! Exit status is 0 on success (negative equivalence answers included), 1 on
//! invalid input and 2 when an internal cross-check fails.

use std::ffi::OsString;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::bieberbach::{
    abelianization, catalog, mapping_torus, tors_h1_two_ways, BieberbachGroupSpec,
};
use crate::classify::{
    affine_class_bound, affine_equivalent, circle_canonical, classes_tsv, compare_with_reference,
    diffeo_classes, dim4_table, inequivalent_family, klein_rho_canonical, stably_diffeomorphic,
    torus_moduli_canonical, AngleTuple,
};
use crate::error::{Error, Result};
use crate::flatbundle::{FlatBase, FlatBundleSpec};
use crate::glattice::{make_glattice, Certificate};
use crate::rational::{format_rational, parse_rational};
use crate::zlinalg::{smith_normal_form, IntMatrix};

#[derive(Parser, Debug)]
#[command(
    name = "cfm",
    version,
    about = "Invariants and classification of complete flat manifolds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Space {
    #[value(name = "T2xR2")]
    T2xR2,
    #[value(name = "TK")]
    Tk,
    #[value(name = "S1xR3")]
    S1xR3,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Smith normal form U·M·V = D of an integer matrix.
    Snf {
        #[arg(long, value_name = "JSON")]
        matrix: String,
    },
    /// H^1 of the cyclic group generated by a finite-order integer matrix.
    H1 {
        #[arg(long, value_name = "JSON")]
        g0: String,
        /// Auxiliary prime coprime to the order of g0.
        #[arg(long)]
        q: Option<u64>,
    },
    /// Abelianization of a catalog group, a JSON group spec, or a mapping torus.
    Homology {
        #[arg(long, conflicts_with_all = ["spec", "mapping_torus"])]
        group: Option<String>,
        #[arg(long, value_name = "JSON", conflicts_with = "mapping_torus")]
        spec: Option<String>,
        /// Integer matrix of finite order; its mapping torus is used.
        #[arg(long, value_name = "JSON")]
        mapping_torus: Option<String>,
    },
    /// Diffeomorphism classes of flat bundles of a given total dimension.
    Classify {
        #[arg(long)]
        base: String,
        #[arg(long)]
        total_dim: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Stable diffeomorphism of two flat bundles over one base.
    StableEq {
        /// First bundle as `{"base", "summands": [{"kind", "free", "torsion"}]}`.
        #[arg(long, value_name = "JSON")]
        bundle1: String,
        /// Second bundle, same format.
        #[arg(long, value_name = "JSON")]
        bundle2: String,
    },
    /// Affine equivalence of two flat bundles over one base.
    AffineEq {
        /// First bundle as `{"base", "summands": [{"kind", "free", "torsion"}]}`.
        #[arg(long, value_name = "JSON")]
        bundle1: String,
        /// Second bundle, same format.
        #[arg(long, value_name = "JSON")]
        bundle2: String,
    },
    /// Canonical form of rational holonomy angles.
    Moduli {
        #[arg(long, value_enum)]
        space: Space,
        /// Comma-separated rationals, e.g. 1/2,0
        #[arg(long, allow_hyphen_values = true)]
        angles: String,
    },
    /// Orientable noncompact complete flat 4-manifolds.
    Dim4Table {
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Pairwise affinely inequivalent bundles with one fundamental group.
    Family {
        #[arg(long)]
        base: String,
        #[arg(long)]
        count: usize,
    },
    /// Upper bound on affine classes over a torus with cyclic holonomy.
    Bound {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        s: usize,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn parse_json<T: serde::de::DeserializeOwned>(flag: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("--{flag}: {e}")))
}

fn card(x: &BigUint) -> Value {
    match x.to_u64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn group_json(spec: &BieberbachGroupSpec) -> Result<Value> {
    let ab = abelianization(spec)?;
    Ok(json!({
        "name": spec.name,
        "dim": spec.dim,
        "holonomy_order": spec.holonomy_order,
        "h1": ab.group.to_string(),
        "free_rank": ab.group.free_rank,
        "torsion": ab.group.torsion.iter().map(card).collect::<Vec<_>>(),
    }))
}

fn dim4_tsv() -> Result<String> {
    let mut out = String::from("index\tlabel\tbase\tfiber_dim\torientable\n");
    for e in dim4_table()? {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            e.index, e.label, e.base, e.fiber_dim, e.orientable
        ));
    }
    Ok(out)
}

pub fn execute(command: &Command) -> Result<String> {
    match command {
        Command::Snf { matrix } => {
            let m: IntMatrix = parse_json("matrix", matrix)?;
            let snf = smith_normal_form(&m);
            Ok(render(&json!({
                "diagonal": snf.diagonal().iter().map(|d| d.to_string()).collect::<Vec<_>>(),
                "rank": snf.rank(),
                "u": snf.u,
                "d": snf.d,
                "v": snf.v,
            })))
        }
        Command::H1 { g0, q } => {
            let m: IntMatrix = parse_json("g0", g0)?;
            let lattice = make_glattice(m)?;
            let report = lattice.h1_report(*q)?;
            let (coinv, tors) = lattice.coinvariants();
            Ok(render(&json!({
                "order": lattice.order(),
                "card_h1": card(&report.card_oracle),
                "oracle": report.group.to_string(),
                "formula": card(&report.card_formula),
                "prime_formula": report.card_prime_formula.as_ref().map(card),
                "q": report.q_used,
                "certificate": match report.certificate {
                    Certificate::ProvenTrivial => "proven_trivial",
                    Certificate::Inconclusive => "inconclusive",
                },
                "coinvariants": coinv.to_string(),
                "tors_coinvariants": tors.to_string(),
            })))
        }
        Command::Homology {
            group,
            spec,
            mapping_torus: torus,
        } => {
            if let Some(name) = group {
                return Ok(render(&group_json(&catalog(name)?)?));
            }
            if let Some(text) = spec {
                let spec: BieberbachGroupSpec = parse_json("spec", text)?;
                return Ok(render(&group_json(&spec)?));
            }
            if let Some(text) = torus {
                let m: IntMatrix = parse_json("mapping-torus", text)?;
                let lattice = make_glattice(m)?;
                let mut doc = group_json(&mapping_torus(&lattice))?;
                let (h1_tors, coinv_tors) = tors_h1_two_ways(&lattice)?;
                if h1_tors != coinv_tors {
                    return Err(Error::Internal(format!(
                        "Tors H_1 = {h1_tors} but Tors A_G = {coinv_tors}"
                    )));
                }
                doc["tors_h1"] = json!(h1_tors.to_string());
                doc["tors_coinvariants"] = json!(coinv_tors.to_string());
                return Ok(render(&doc));
            }
            Err(Error::InvalidArgument(
                "one of --group, --spec, --mapping-torus is required".into(),
            ))
        }
        Command::Classify {
            base,
            total_dim,
            format,
        } => {
            let b = FlatBase::from_catalog(base)?;
            let classes = diffeo_classes(&b, *total_dim)?;
            let comparison = compare_with_reference(&b, *total_dim)?;
            match format {
                Format::Tsv => Ok(classes_tsv(&classes, Some(&comparison))),
                Format::Json => Ok(render(&json!({
                    "base": base,
                    "total_dim": total_dim,
                    "count": classes.len(),
                    "classes": classes.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
                    "comparison": comparison,
                }))),
            }
        }
        Command::StableEq { bundle1, bundle2 } => {
            let b1 = FlatBundleSpec::from_json(bundle1)?;
            let b2 = FlatBundleSpec::from_json(bundle2)?;
            Ok(render(
                &json!({ "equivalent": stably_diffeomorphic(&b1, &b2)? }),
            ))
        }
        Command::AffineEq { bundle1, bundle2 } => {
            let b1 = FlatBundleSpec::from_json(bundle1)?;
            let b2 = FlatBundleSpec::from_json(bundle2)?;
            Ok(render(
                &json!({ "equivalent": affine_equivalent(&b1, &b2)? }),
            ))
        }
        Command::Moduli { space, angles } => {
            let parsed = angles
                .split(',')
                .map(parse_rational)
                .collect::<Result<Vec<_>>>()?;
            let input = AngleTuple::new(parsed);
            let (name, canonical) = match space {
                Space::T2xR2 => ("T2xR2", torus_moduli_canonical(&input)?),
                Space::Tk => ("TK", klein_rho_canonical(&input)?),
                Space::S1xR3 => {
                    if input.0.len() != 1 {
                        return Err(Error::InvalidArgument(format!(
                            "S1xR3 takes one angle, got {}",
                            input.0.len()
                        )));
                    }
                    ("S1xR3", AngleTuple(vec![circle_canonical(&input.0[0])]))
                }
            };
            Ok(render(&json!({
                "space": name,
                "input": input.formatted(),
                "canonical": canonical.0.iter().map(format_rational).collect::<Vec<_>>(),
            })))
        }
        Command::Dim4Table { format } => match format {
            Format::Tsv => dim4_tsv(),
            Format::Json => {
                let entries = dim4_table()?;
                Ok(render(
                    &json!({ "count": entries.len(), "entries": entries }),
                ))
            }
        },
        Command::Family { base, count } => {
            let b = FlatBase::from_catalog(base)?;
            let family = inequivalent_family(&b, *count)?;
            let mut pairs = 0usize;
            let mut inequivalent = 0usize;
            for i in 0..family.len() {
                for j in i + 1..family.len() {
                    pairs += 1;
                    if !affine_equivalent(&family[i], &family[j])? {
                        inequivalent += 1;
                    }
                }
            }
            Ok(render(&json!({
                "base": base,
                "count": family.len(),
                "members": family,
                "pairs_checked": pairs,
                "inequivalent_pairs": inequivalent,
            })))
        }
        Command::Bound { n, k, s } => Ok(render(&json!({
            "n": n,
            "k": k,
            "s": s,
            "bound": affine_class_bound(*n, *k, *s)?,
        }))),
    }
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() { 1 } else { 0 };
            let (stdout, stderr) = if code == 0 {
                (text, String::new())
            } else {
                (String::new(), text)
            };
            return Outcome {
                code,
                stdout,
                stderr,
            };
        }
    };
    match execute(&cli.command) {
        Ok(stdout) => Outcome {
            code: 0,
            stdout,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: if e.is_internal() { 2 } else { 1 },
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfm(args: &[&str]) -> Outcome {
        run(std::iter::once("cfm").chain(args.iter().copied()))
    }

    fn doc(args: &[&str]) -> Value {
        let out = cfm(args);
        assert_eq!(out.code, 0, "{}", out.stderr);
        serde_json::from_str(&out.stdout).unwrap()
    }

    #[test]
    fn parse_examples() {
        let cli =
            Cli::try_parse_from(["cfm", "h1", "--g0", "[[0,-1],[1,-1]]", "--q", "2"]).unwrap();
        assert!(matches!(cli.command, Command::H1 { q: Some(2), .. }));
        let cli = Cli::try_parse_from(["cfm", "moduli", "--space", "T2xR2", "--angles", "1/2,0"])
            .unwrap();
        assert!(matches!(
            cli.command,
            Command::Moduli {
                space: Space::T2xR2,
                ..
            }
        ));
        assert!(Cli::try_parse_from(["cfm", "frobnicate"]).is_err());
    }

    #[test]
    fn h1_example() {
        let d = doc(&["h1", "--g0", "[[0,-1],[1,-1]]", "--q", "2"]);
        assert_eq!(d["order"], 3);
        assert_eq!(d["card_h1"], 3);
        assert_eq!(d["oracle"], "Z/3");
        assert_eq!(d["formula"], 3);
        let bad = cfm(&["h1", "--g0", "[[2,0],[0,1]]"]);
        assert_eq!(bad.code, 1);
        assert!(bad.stderr.contains("not unimodular"));
    }

    #[test]
    fn input_errors_exit_one() {
        assert_eq!(cfm(&["frobnicate"]).code, 1);
        assert_eq!(cfm(&["snf", "--matrix", "[[1,2],[3]]"]).code, 1);
        assert_eq!(
            cfm(&["moduli", "--space", "TK", "--angles", "1/x,0"]).code,
            1
        );
        assert_eq!(cfm(&["h1", "--g0", "[[1,1],[0,1]]"]).code, 1);
        assert_eq!(cfm(&["--help"]).code, 0);
    }

    #[test]
    fn classify_and_tables() {
        assert_eq!(
            doc(&["classify", "--base", "T2", "--total-dim", "5"])["count"],
            4
        );
        assert_eq!(doc(&["dim4-table"])["count"], 14);
        let tsv = cfm(&[
            "classify",
            "--base",
            "K",
            "--total-dim",
            "4",
            "--format",
            "tsv",
        ]);
        assert!(tsv.stdout.contains("REFERENCE_ORBIT_COLLISION"));
        assert_eq!(
            cfm(&["dim4-table", "--format", "tsv"])
                .stdout
                .lines()
                .count(),
            15
        );
    }

    #[test]
    fn equivalence_payloads() {
        let a = r#"{"base":"S1","summands":[{"kind":"complex","free":["1/3"],"torsion":[]}]}"#;
        let b = r#"{"base":"S1","summands":[{"kind":"complex","free":["2/3"],"torsion":[]}]}"#;
        let c = r#"{"base":"S1","summands":[{"kind":"complex","free":["1/4"],"torsion":[]}]}"#;
        assert_eq!(
            doc(&["affine-eq", "--bundle1", a, "--bundle2", b])["equivalent"],
            true
        );
        assert_eq!(
            doc(&["affine-eq", "--bundle1", a, "--bundle2", c])["equivalent"],
            false
        );
        let m1 = r#"{"base":"T2","summands":[{"kind":"real","free":["1/2","0"],"torsion":[]}]}"#;
        let m2 = r#"{"base":"T2","summands":[{"kind":"real","free":["0","1/2"],"torsion":[]}]}"#;
        assert_eq!(
            doc(&["stable-eq", "--bundle1", m1, "--bundle2", m2])["equivalent"],
            true
        );
        assert_eq!(cfm(&["stable-eq", "--bundle1", m1, "--bundle2", a]).code, 1);
    }

    #[test]
    fn remaining_verbs() {
        let d = doc(&["moduli", "--space", "S1xR3", "--angles", "2/3"]);
        assert_eq!(d["canonical"], json!(["1/3"]));
        let d = doc(&["homology", "--group", "K"]);
        assert_eq!(d["h1"], "Z + Z/2");
        let d = doc(&["homology", "--mapping-torus", "[[-1,0],[0,-1]]"]);
        assert_eq!(d["tors_h1"], "Z/2 + Z/2");
        let d = doc(&["family", "--base", "S1", "--count", "4"]);
        assert_eq!(
            (d["pairs_checked"].clone(), d["inequivalent_pairs"].clone()),
            (json!(6), json!(6))
        );
        assert_eq!(
            doc(&["bound", "--n", "2", "--k", "2", "--s", "1"])["bound"],
            6
        );
        let d = doc(&["snf", "--matrix", "[[2,4],[6,8]]"]);
        assert_eq!(d["diagonal"], json!(["2", "4"]));
    }

    #[test]
    fn output_is_byte_stable() {
        let args = ["classify", "--base", "K", "--total-dim", "5"];
        assert_eq!(cfm(&args), cfm(&args));
        assert!(!cfm(&args).stdout.contains('\r'));
    }
}
