//! `cgt` — command-line front end for the group-theory toolkit.
//!
//! Exit codes: 0 check passed / verdict positive, 1 check failed,
//! 2 inconclusive, 3+ usage or parse error.

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cgt_core::bassserre::{acyl_sample, parse_gog, path_stabilizer, AcylVerdict};
use cgt_core::bns::{self, Character, KernelVerdict, SigmaVerdict};
use cgt_core::onerelator::{build_hierarchy, magnus_step, HierarchyResult, OneRelatorPresentation, TerminalCertificate};
use cgt_core::smallcancel::{CprimeVerdict, Rational, SymmetrizedSet};
use cgt_core::stallings::{HeightVerdict, Malnormality, SubgroupGraph, DEFAULT_CAP};
use cgt_core::Word;

use cgt_cli::files::{parse_path_file, parse_presentation_file, parse_subgroup_file};
use cgt_cli::report::{
    OutputFormat, Report, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_PASS, EXIT_USAGE,
};
use cgt_cli::repro;

#[derive(Parser)]
#[command(name = "cgt", version, about = "Stallings graphs, small cancellation, one-relator hierarchies, BNS kernels, and Bass-Serre path stabilizers")]
struct Cli {
    /// Seed for randomized commands (recorded in output)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Resource cap for fiber products and related explorations
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> OutputFormat {
        match f {
            Format::Text => OutputFormat::Text,
            Format::Machine => OutputFormat::Machine,
        }
    }
}

#[derive(Args)]
struct SubgroupFileArgs {
    /// Subgroup file: one generator word per line
    file: String,
    /// Ambient free-group alphabet, e.g. "a b" (default: inferred)
    #[arg(long)]
    alphabet: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the metric small-cancellation condition C'(lambda)
    Cprime {
        /// Presentation file ([generators] / [relator] lines)
        file: String,
        /// The lambda threshold, e.g. 1/6
        #[arg(long, default_value = "1/6")]
        lambda: String,
    },
    /// Fold a subgroup file and print the canonical graph
    Fold(SubgroupFileArgs),
    /// Decide membership of a word in the subgroup
    Member {
        #[command(flatten)]
        sub: SubgroupFileArgs,
        /// Query word in words syntax
        #[arg(long)]
        word: String,
    },
    /// Intersect the subgroups of two files over a common alphabet
    Intersect {
        file1: String,
        file2: String,
        #[arg(long)]
        alphabet: Option<String>,
    },
    /// Decide malnormality of the subgroup
    Malnormal(SubgroupFileArgs),
    /// Check that the subgroup has height at most N
    Height {
        #[command(flatten)]
        sub: SubgroupFileArgs,
        #[arg(long)]
        max: usize,
    },
    /// One Moldavanskii rewriting step of a one-relator presentation
    MagnusStep {
        /// Presentation file with a single relator
        file: String,
        /// Pivot generator (zero exponent sum in the relator)
        #[arg(long)]
        pivot: String,
    },
    /// Run the Magnus hierarchy to a terminal certificate
    Hierarchy {
        file: String,
        #[arg(long, default_value_t = cgt_core::onerelator::DEFAULT_MAX_DEPTH)]
        max_depth: usize,
    },
    /// Sigma membership and kernel finite generation for a character
    Bns {
        file: String,
        /// Character weights, e.g. a=1,b=-1
        #[arg(long = "char")]
        character: String,
    },
    /// Validate a graph-of-free-groups file
    ValidateGog { file: String },
    /// Pointwise stabilizer of a Bass-Serre tree path
    Stabilizer {
        #[arg(long)]
        gog: String,
        #[arg(long)]
        path: String,
    },
    /// Sample reduced k-paths and search for stabilizer violations
    Acyl {
        #[arg(long)]
        gog: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Radius of the ball the connecting elements are drawn from
        #[arg(long, default_value_t = 3)]
        ball: usize,
    },
    /// Reproduction pipelines for the worked examples
    Repro {
        #[arg(value_enum)]
        case: ReproCase,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReproCase {
    #[value(name = "ex-2-9")]
    Ex2_9,
    #[value(name = "ex-3-7")]
    Ex3_7,
    #[value(name = "prop-4-1")]
    Prop4_1,
}

fn read(path: &str) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))
}

fn parse_single_relator(path: &str) -> Result<OneRelatorPresentation, String> {
    let text = read(path)?;
    let (alphabet, relators) = parse_presentation_file(&text).map_err(|e| e.to_string())?;
    if relators.len() != 1 {
        return Err(format!("{path}: expected exactly one [relator], got {}", relators.len()));
    }
    OneRelatorPresentation::new(alphabet, &relators[0]).map_err(|e| e.to_string())
}

fn load_subgroup(args: &SubgroupFileArgs) -> Result<SubgroupGraph, String> {
    let text = read(&args.file)?;
    let (alphabet, words) =
        parse_subgroup_file(&text, args.alphabet.as_deref()).map_err(|e| e.to_string())?;
    SubgroupGraph::build(alphabet, &words).map_err(|e| e.to_string())
}

fn parse_character(spec: &str, p: &OneRelatorPresentation) -> Result<Character, String> {
    let mut weights = vec![0i64; p.alphabet().len()];
    for part in spec.split(',') {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| format!("bad character entry `{part}`, expected name=weight"))?;
        let idx = p
            .alphabet()
            .names()
            .iter()
            .position(|n| n == name.trim())
            .ok_or_else(|| format!("unknown generator `{}`", name.trim()))?;
        weights[idx] = value
            .trim()
            .parse()
            .map_err(|_| format!("bad weight `{}`", value.trim()))?;
    }
    Character::new(p.alphabet().clone(), weights).map_err(|e| e.to_string())
}

fn fmt_sigma(v: &SigmaVerdict) -> String {
    match v {
        SigmaVerdict::InSigma => "in_sigma".to_owned(),
        SigmaVerdict::NotInSigma => "not_in_sigma".to_owned(),
        SigmaVerdict::Inconclusive(why) => format!("inconclusive ({why})"),
    }
}

fn fmt_kernel(v: &KernelVerdict) -> String {
    match v {
        KernelVerdict::FinitelyGenerated => "finitely_generated".to_owned(),
        KernelVerdict::NotFinitelyGenerated => "not_finitely_generated".to_owned(),
        KernelVerdict::Inconclusive(why) => format!("inconclusive ({why})"),
    }
}

fn run(cli: Cli) -> Result<(Report, i32), String> {
    let format = cli.format;
    let mut out = Report::new();
    let code = match cli.command {
        Command::Cprime { file, lambda } => {
            let lambda = Rational::parse(&lambda)
                .ok_or_else(|| format!("bad --lambda `{lambda}`, expected P/Q"))?;
            let text = read(&file)?;
            let (alphabet, relators) =
                parse_presentation_file(&text).map_err(|e| e.to_string())?;
            let set = SymmetrizedSet::new(alphabet, &relators).map_err(|e| e.to_string())?;
            let report = set.pieces();
            for line in report.to_lines() {
                let (k, v) = line.split_once(" = ").expect("key = value lines");
                out.push(k, v);
            }
            match set.cprime(lambda).map_err(|e| e.to_string())? {
                CprimeVerdict::Holds => {
                    out.push("cprime", "holds");
                    EXIT_PASS
                }
                CprimeVerdict::Fails { piece, relator } => {
                    out.push("cprime", "fails");
                    out.push("failing_piece", piece);
                    out.push("failing_relator", relator);
                    EXIT_FAIL
                }
            }
        }
        Command::Fold(args) => {
            let g = load_subgroup(&args)?;
            out.push("rank", g.rank());
            out.push("graph", g.canonical_string().trim_end());
            EXIT_PASS
        }
        Command::Member { sub, word } => {
            let g = load_subgroup(&sub)?;
            let w = Word::parse(g.alphabet(), &word).map_err(|e| e.to_string())?;
            match g.membership(&w).map_err(|e| e.to_string())? {
                Some(witness) => {
                    out.push("member", true);
                    out.push("witness", g.basis().expand(&witness));
                    EXIT_PASS
                }
                None => {
                    out.push("member", false);
                    EXIT_FAIL
                }
            }
        }
        Command::Intersect {
            file1,
            file2,
            alphabet,
        } => {
            let t1 = read(&file1)?;
            let t2 = read(&file2)?;
            // share one alphabet across both files
            let joint = match &alphabet {
                Some(a) => a.clone(),
                None => {
                    let (a1, _) = parse_subgroup_file(&t1, None).map_err(|e| e.to_string())?;
                    let (a2, _) = parse_subgroup_file(&t2, None).map_err(|e| e.to_string())?;
                    let mut names = a1.names().to_vec();
                    for n in a2.names() {
                        if !names.contains(n) {
                            names.push(n.clone());
                        }
                    }
                    names.join(" ")
                }
            };
            let (alpha, w1) =
                parse_subgroup_file(&t1, Some(&joint)).map_err(|e| e.to_string())?;
            let (_, w2) = parse_subgroup_file(&t2, Some(&joint)).map_err(|e| e.to_string())?;
            let g1 = SubgroupGraph::build(alpha.clone(), &w1).map_err(|e| e.to_string())?;
            let g2 = SubgroupGraph::build(alpha, &w2).map_err(|e| e.to_string())?;
            let meet = g1.intersect(&g2).map_err(|e| e.to_string())?;
            out.push("rank", meet.rank());
            for (i, w) in meet.basis().words.iter().enumerate() {
                out.push(format!("basis_{i}"), w);
            }
            out.push("graph", meet.canonical_string().trim_end());
            EXIT_PASS
        }
        Command::Malnormal(args) => {
            let g = load_subgroup(&args)?;
            match g.is_malnormal(cli.cap) {
                Malnormality::Malnormal => {
                    out.push("malnormal", true);
                    EXIT_PASS
                }
                Malnormality::NotMalnormal { witness } => {
                    out.push("malnormal", false);
                    out.push("witness_conjugator", witness);
                    EXIT_FAIL
                }
                Malnormality::Inconclusive => {
                    out.push("malnormal", "inconclusive");
                    EXIT_INCONCLUSIVE
                }
            }
        }
        Command::Height { sub, max } => {
            let g = load_subgroup(&sub)?;
            let cert = g.height_leq(max, cli.cap);
            out.push("n", cert.n);
            match cert.verdict {
                HeightVerdict::Holds => {
                    out.push("height_leq", "holds");
                    EXIT_PASS
                }
                HeightVerdict::Fails { witnesses } => {
                    out.push("height_leq", "fails");
                    for (i, w) in witnesses.iter().enumerate() {
                        out.push(format!("witness_{i}"), w);
                    }
                    EXIT_FAIL
                }
                HeightVerdict::Inconclusive => {
                    out.push("height_leq", "inconclusive");
                    EXIT_INCONCLUSIVE
                }
            }
        }
        Command::MagnusStep { file, pivot } => {
            let p = parse_single_relator(&file)?;
            let step = magnus_step(&p, &pivot).map_err(|e| e.to_string())?;
            out.push("vertex", &step.vertex);
            out.push("left_magnus", step.left_magnus.join(" "));
            out.push("right_magnus", step.right_magnus.join(" "));
            out.push("stable_letter", &step.stable_letter);
            for (new, (old, j)) in &step.index_map {
                out.push(format!("index_map.{new}"), format!("{old} @ {j}"));
            }
            EXIT_PASS
        }
        Command::Hierarchy { file, max_depth } => {
            let p = parse_single_relator(&file)?;
            match build_hierarchy(&p, max_depth).map_err(|e| e.to_string())? {
                HierarchyResult::Complete(h) => {
                    for (i, s) in h.steps.iter().enumerate() {
                        if let Some(st) = &s.stabilization {
                            out.push(
                                format!("step_{i}.stabilized"),
                                format!("new generator {}", st.new_generator),
                            );
                        }
                        out.push(format!("step_{i}.pivot"), &s.step.pivot);
                        out.push(format!("step_{i}.vertex"), &s.step.vertex);
                        out.push(
                            format!("step_{i}.left_magnus"),
                            s.step.left_magnus.join(" "),
                        );
                        out.push(
                            format!("step_{i}.right_magnus"),
                            s.step.right_magnus.join(" "),
                        );
                        out.push(format!("step_{i}.stable_letter"), &s.step.stable_letter);
                    }
                    out.push("terminal", &h.terminal);
                    match &h.certificate {
                        TerminalCertificate::Free { eliminated, rank } => {
                            out.push("certificate", format!("free of rank {rank} (eliminate {eliminated})"));
                        }
                        TerminalCertificate::CyclicBase {
                            generator,
                            exponent,
                        } => {
                            out.push(
                                "certificate",
                                format!("free product with {generator}^{exponent} torsion base"),
                            );
                        }
                    }
                    EXIT_PASS
                }
                HierarchyResult::DepthCapped { steps, remaining } => {
                    out.push("depth_capped_after", steps.len());
                    out.push("remaining", remaining);
                    EXIT_INCONCLUSIVE
                }
            }
        }
        Command::Bns { file, character } => {
            let p = parse_single_relator(&file)?;
            let chi = parse_character(&character, &p)?;
            bns::validate(&chi, &p).map_err(|e| e.to_string())?;
            let plus = bns::sigma_membership(&chi, &p).map_err(|e| e.to_string())?;
            let minus =
                bns::sigma_membership(&chi.negate(), &p).map_err(|e| e.to_string())?;
            let kernel = bns::kernel_fg(&chi, &p).map_err(|e| e.to_string())?;
            out.push("sigma_plus", fmt_sigma(&plus));
            out.push("sigma_minus", fmt_sigma(&minus));
            out.push("kernel_fg", fmt_kernel(&kernel));
            let decided = !matches!(plus, SigmaVerdict::Inconclusive(_))
                && !matches!(minus, SigmaVerdict::Inconclusive(_))
                && !matches!(kernel, KernelVerdict::Inconclusive(_));
            if decided {
                EXIT_PASS
            } else {
                EXIT_INCONCLUSIVE
            }
        }
        Command::ValidateGog { file } => {
            let gog = parse_gog(&read(&file)?).map_err(|e| e.to_string())?;
            out.push("vertices", gog.vertices.len());
            out.push("edges", gog.edges.len());
            match gog.validate() {
                Ok(()) => {
                    out.push("valid", true);
                    EXIT_PASS
                }
                Err(e) => {
                    out.push("valid", false);
                    out.push("reason", e);
                    EXIT_FAIL
                }
            }
        }
        Command::Stabilizer { gog, path } => {
            let g = parse_gog(&read(&gog)?).map_err(|e| e.to_string())?;
            let p = parse_path_file(&read(&path)?, &g).map_err(|e| e.to_string())?;
            let stab = path_stabilizer(&g, &p).map_err(|e| e.to_string())?;
            out.push("rank", stab.rank());
            for (i, w) in stab.basis().words.iter().enumerate() {
                out.push(format!("basis_{i}"), w);
            }
            if stab.is_trivial() {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Command::Acyl {
            gog,
            k,
            samples,
            ball,
        } => {
            let g = parse_gog(&read(&gog)?).map_err(|e| e.to_string())?;
            let report =
                acyl_sample(&g, k, 1, samples, cli.seed, ball).map_err(|e| e.to_string())?;
            out.push("k", report.k);
            out.push("samples", report.samples);
            out.push("seed", report.seed);
            out.push("ball_radius", report.ball_radius);
            out.push("rejections", report.rejections);
            out.push("inconclusive_samples", report.inconclusive);
            out.push("verdict", &report.verdict);
            for (i, (path, rank)) in report.violations.iter().enumerate() {
                out.push(
                    format!("violation_{i}"),
                    format!("{} (stabilizer rank {rank})", repro::render_path(&g, path)),
                );
            }
            match report.verdict {
                AcylVerdict::NoViolationFound if report.inconclusive == 0 => EXIT_PASS,
                AcylVerdict::NoViolationFound => EXIT_INCONCLUSIVE,
                AcylVerdict::Violated => EXIT_FAIL,
            }
        }
        Command::Repro { case } => {
            let rep = match case {
                ReproCase::Ex2_9 => repro::repro_ex_2_9(cli.cap),
                ReproCase::Ex3_7 => repro::repro_ex_3_7(),
                ReproCase::Prop4_1 => repro::repro_prop_4_1(cli.seed, cli.cap),
            };
            print!("{}", rep.render(format.into()));
            return Ok((Report::new(), rep.exit_code()));
        }
    };
    Ok((out, code))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version requests are not usage errors
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::from(0);
            }
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let format = cli.format;
    match run(cli) {
        Ok((report, code)) => {
            print!("{}", report.render(format.into()));
            ExitCode::from(code as u8)
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
