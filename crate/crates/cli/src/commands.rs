use std::fs;
use std::path::PathBuf;

use aitlab::complexity::{
    log_n, soi_report, Lab, LabConfig, PairSample, TableSource, DEFAULT_WORK_CEILING,
};
use aitlab::covering::{greedy_covering, random_covering, verify_covering, CoverCandidate};
use aitlab::depsets::{
    dep_degree, dep_set_a, dep_set_a_restricted, dep_set_b, thm1_witnesses, Degree, DegreeMode,
    DepParams,
};
use aitlab::extractor::{
    bad_partition, lower_bound_certificate, make_random_extractor, CountParams, ExtractorTable,
};
use aitlab::independence::{
    build_dep_graph, caro_wei_independent_set, check_mutual_independent,
    check_pairwise_independent, intersect_dep_sets, DEFAULT_MAX_GRAPH_N,
};
use aitlab::machine;
use aitlab::selftest::run_selftest;
use aitlab::Bitstring;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Cli, Command, CoverMode, Global, SetKind};
use crate::error::CliError;
use crate::report::{Envelope, ExperimentConfig, Output};

pub fn parse_bits(s: &str) -> Result<Bitstring, CliError> {
    match s {
        "" | "empty" | "ε" => Ok(Bitstring::empty()),
        _ => Ok(s.parse()?),
    }
}

fn parse_list(items: &[String]) -> Result<Vec<Bitstring>, CliError> {
    items.iter().map(|s| parse_bits(s)).collect()
}

/// `empty`, `len` (meaning bin(n)) or a bit literal.
pub fn parse_condition(s: &str, n: usize) -> Result<Bitstring, CliError> {
    match s {
        "len" => Ok(Bitstring::bin(n as u64)),
        _ => parse_bits(s),
    }
}

fn same_length(xs: &[Bitstring]) -> Result<usize, CliError> {
    let n = xs.first().map(Bitstring::len).unwrap_or(0);
    if n == 0 || xs.iter().any(|x| x.len() != n) {
        return Err(CliError::Invalid(
            "strings must be nonempty and share one length".into(),
        ));
    }
    Ok(n)
}

struct Ctx {
    lab: Lab,
    config: ExperimentConfig,
    out: Output,
}

impl Ctx {
    fn emit<R: Serialize>(&self, result: Value, rows: &[R]) -> Result<(), CliError> {
        let env = Envelope {
            config: &self.config,
            machine_version: machine::version_id(),
            tables: self.lab.provenance(),
            result,
        };
        self.out.emit(&env, rows)
    }
}

fn lab_for(g: &Global, cache_dir: PathBuf) -> Result<Lab, CliError> {
    fs::create_dir_all(&cache_dir)?;
    Ok(Lab::new(LabConfig {
        cap_slack: g.cap_slack,
        work_ceiling: if g.force {
            f64::INFINITY
        } else {
            DEFAULT_WORK_CEILING
        },
        cache_dir: Some(cache_dir),
    }))
}

fn base_config(g: &Global, command: &str) -> ExperimentConfig {
    ExperimentConfig {
        command: command.to_string(),
        t: g.t,
        cap_slack: g.cap_slack,
        force: g.force,
        cache_dir: g.cache_dir.clone(),
        format: g.format,
        out: g.out.clone(),
        ..ExperimentConfig::default()
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::BuildTable { .. } => "build-table",
        Command::Depset { .. } => "depset",
        Command::Degree { .. } => "degree",
        Command::Thm1Witness { .. } => "thm1-witness",
        Command::Graph { .. } => "graph",
        Command::IndepSet { .. } => "indep-set",
        Command::CheckPairwise { .. } => "check-pairwise",
        Command::CheckMutual { .. } => "check-mutual",
        Command::Intersect { .. } => "intersect",
        Command::Cover { mode } => match mode {
            CoverMode::Random { .. } => "cover-random",
            CoverMode::Greedy { .. } => "cover-greedy",
            CoverMode::Verify { .. } => "cover-verify",
        },
        Command::ExtractCount { .. } => "extract-count",
        Command::SoiReport { .. } => "soi-report",
        Command::Selftest { .. } => "selftest",
    }
}

fn max_n(g: &Global) -> usize {
    if g.force {
        usize::MAX
    } else {
        DEFAULT_MAX_GRAPH_N
    }
}

#[derive(Serialize)]
struct ValueRow {
    x: Bitstring,
    complexity: Option<u32>,
}

#[derive(Serialize)]
struct EdgeRow {
    u: Bitstring,
    v: Bitstring,
}

#[derive(Serialize)]
struct StringRow {
    string: Bitstring,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let g = &cli.global;
    if let Some(w) = g.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .map_err(|e| CliError::Invalid(e.to_string()))?;
    }
    let mut config = base_config(g, command_name(&cli.command));
    let mut out = Output {
        format: g.format,
        path: g.out.clone(),
    };
    let mut cache_dir = g.cache_dir.clone();
    if let Command::BuildTable { .. } = cli.command {
        // `--out` names the cache directory here; the report goes to stdout
        if let Some(dir) = &g.out {
            cache_dir = dir.clone();
            config.cache_dir = dir.clone();
        }
        out.path = None;
    }
    let lab = lab_for(g, cache_dir)?;
    let t = g.t;
    let mut ctx = Ctx { lab, config, out };

    match &cli.command {
        Command::BuildTable { n, cond } => {
            let w = parse_condition(cond, *n)?;
            ctx.config.n = Some(*n);
            ctx.config.cond = Some(cond.clone());
            let table = ctx.lab.table(*n, &w, t)?;
            let histogram: Vec<usize> = (0..=table.length_cap as u32 + 1)
                .map(|k| table.count_below(k))
                .collect();
            let result = json!({
                "key": table.key(),
                "total": table.is_total(),
                "max_value": table.max_value(),
                "count_below": histogram,
                "programs_run": ctx.lab.programs_run(),
            });
            let rows: Vec<ValueRow> = Bitstring::all(*n)
                .enumerate()
                .map(|(i, x)| ValueRow {
                    complexity: table.at(i),
                    x,
                })
                .collect();
            ctx.emit(result, &rows)
        }
        Command::Depset {
            kind,
            x,
            alpha,
            s,
            members,
        } => {
            let x = parse_bits(x)?;
            let n = x.len();
            ctx.config.n = Some(n);
            ctx.config.alpha = Some(*alpha);
            ctx.config.s = *s;
            ctx.config.strings = vec![x.to_string()];
            let mut p = DepParams::new(n, *alpha, t);
            if let Some(s) = s {
                p = p.with_floor(*s);
            }
            let r = match kind {
                SetKind::A => {
                    ctx.config.variant = Some("A".into());
                    dep_set_a(&ctx.lab, &x, p)?
                }
                SetKind::B => {
                    ctx.config.variant = Some("B".into());
                    dep_set_b(&ctx.lab, &x, p)?
                }
                SetKind::ARestricted => {
                    ctx.config.variant = Some("A-restricted".into());
                    dep_set_a_restricted(&ctx.lab, &x, p)?
                }
            };
            let mut result = serde_json::to_value(&r)?;
            if !members {
                result.as_object_mut().unwrap().remove("members");
            }
            ctx.emit(result, &[r.row()])
        }
        Command::Degree {
            u,
            alpha,
            sample,
            seed,
        } => {
            let u = parse_bits(u)?;
            let n = u.len();
            ctx.config.n = Some(n);
            ctx.config.alpha = Some(*alpha);
            ctx.config.strings = vec![u.to_string()];
            let mode = match sample {
                Some(count) => {
                    ctx.config.samples = Some(*count);
                    ctx.config.seed = Some(*seed);
                    DegreeMode::Sampled {
                        count: *count,
                        seed: *seed,
                    }
                }
                None => DegreeMode::Full,
            };
            let r = dep_degree(&ctx.lab, &u, DepParams::new(n, *alpha, t), mode)?;
            let members = match &r.degree {
                Degree::Exact { members, .. } => members,
                Degree::Estimate {
                    members_in_sample, ..
                } => members_in_sample,
            };
            let rows: Vec<StringRow> = members
                .iter()
                .map(|x| StringRow { string: x.clone() })
                .collect();
            ctx.emit(serde_json::to_value(&r)?, &rows)
        }
        Command::Thm1Witness { x, alpha, slack } => {
            let x = parse_bits(x)?;
            ctx.config.n = Some(x.len());
            ctx.config.alpha = Some(*alpha);
            ctx.config.slack = *slack;
            ctx.config.strings = vec![x.to_string()];
            let fam = thm1_witnesses(&ctx.lab, &x, *alpha, t, *slack)?;
            ctx.emit(serde_json::to_value(&fam)?, &fam.members)
        }
        Command::Graph { n, beta } => {
            ctx.config.n = Some(*n);
            ctx.config.beta = Some(*beta);
            let dg = build_dep_graph(&ctx.lab, *n, *beta, t, None, max_n(g))?;
            let rows: Vec<EdgeRow> = dg
                .edge_list()
                .into_iter()
                .map(|(u, v)| EdgeRow { u, v })
                .collect();
            let result = json!({
                "n": n,
                "beta": beta,
                "vertices": dg.vertices.len(),
                "edges": rows.len(),
                "degrees": dg.degrees(),
                "edge_list": dg.edge_list(),
            });
            ctx.emit(result, &rows)
        }
        Command::IndepSet { n, beta } => {
            ctx.config.n = Some(*n);
            ctx.config.beta = Some(*beta);
            let dg = build_dep_graph(&ctx.lab, *n, *beta, t, None, max_n(g))?;
            let cw = caro_wei_independent_set(&dg.graph);
            let set = dg.labels(&cw.set);
            let alpha = beta + 5 * log_n(*n);
            let pairwise = if set.len() >= 2 {
                Some(check_pairwise_independent(&ctx.lab, &set, alpha, t)?)
            } else {
                None
            };
            let result = json!({
                "set": set,
                "size": set.len(),
                "caro_wei_sum": cw.bound,
                "caro_wei_ceil": cw.bound_ceil,
                "independent_in_graph": dg.graph.is_independent(&cw.set),
                "pairwise_alpha": alpha,
                "pairwise": pairwise,
            });
            let rows: Vec<StringRow> = set.into_iter().map(|s| StringRow { string: s }).collect();
            ctx.emit(result, &rows)
        }
        Command::CheckPairwise { set, alpha } => {
            let xs = parse_list(set)?;
            ctx.config.n = Some(same_length(&xs)?);
            ctx.config.alpha = Some(*alpha);
            ctx.config.strings = set.clone();
            let r = check_pairwise_independent(&ctx.lab, &xs, *alpha, t)?;
            ctx.emit(serde_json::to_value(&r)?, &r.violations)
        }
        Command::CheckMutual {
            tuple,
            alpha,
            perm_cap,
            seed,
        } => {
            let xs = parse_list(tuple)?;
            same_length(&xs)?;
            ctx.config.n = xs.first().map(Bitstring::len);
            ctx.config.k = Some(xs.len());
            ctx.config.alpha = Some(*alpha);
            ctx.config.perm_cap = Some(*perm_cap);
            ctx.config.seed = Some(*seed);
            ctx.config.strings = tuple.clone();
            let r = check_mutual_independent(&ctx.lab, &xs, *alpha, t, *perm_cap, *seed)?;
            #[derive(Serialize)]
            struct PermRow {
                order: String,
                complexity: Option<u32>,
            }
            let rows: Vec<PermRow> = r
                .permutations
                .iter()
                .map(|p| PermRow {
                    order: p
                        .order
                        .iter()
                        .map(|i| i.to_string())
                        .collect::<Vec<_>>()
                        .join(" "),
                    complexity: p.complexity,
                })
                .collect();
            ctx.emit(serde_json::to_value(&r)?, &rows)
        }
        Command::Intersect { xs, alpha } => {
            let list = parse_list(xs)?;
            ctx.config.n = Some(same_length(&list)?);
            ctx.config.k = Some(list.len());
            ctx.config.alpha = Some(*alpha);
            ctx.config.strings = xs.clone();
            let r = intersect_dep_sets(&ctx.lab, &list, *alpha, t)?;
            let rows: Vec<StringRow> = r
                .members
                .iter()
                .map(|s| StringRow { string: s.clone() })
                .collect();
            ctx.emit(serde_json::to_value(&r)?, &rows)
        }
        Command::Cover { mode } => run_cover(&mut ctx, g, mode),
        Command::ExtractCount {
            n,
            m,
            seed,
            table,
            save,
            x,
            alpha,
            s,
        } => {
            let x = parse_bits(x)?;
            let e = match table {
                Some(stem) => ExtractorTable::load(stem)?,
                None => make_random_extractor(*n, *m, *seed)?,
            };
            if e.n() != *n || e.m() != *m {
                return Err(CliError::Invalid(format!(
                    "loaded table is n={}, m={}; expected n={n}, m={m}",
                    e.n(),
                    e.m()
                )));
            }
            if let Some(stem) = save {
                e.save(stem, false)?;
            }
            ctx.config.n = Some(*n);
            ctx.config.m = Some(*m);
            ctx.config.seed = table.is_none().then_some(*seed);
            ctx.config.alpha = Some(*alpha);
            ctx.config.s = Some(*s);
            ctx.config.strings = vec![x.to_string()];
            let p = CountParams {
                s: *s,
                alpha: *alpha,
                t,
            };
            let part = bad_partition(&ctx.lab, &e, &x, p)?;
            let cert = lower_bound_certificate(&ctx.lab, &e, &x, p)?;
            let b = dep_set_b(&ctx.lab, &x, DepParams::new(*n, *alpha, t))?;
            let (chi2, df) = e.chi_square();
            let result = json!({
                "extractor": e.meta,
                "chi_square": chi2,
                "degrees_of_freedom": df,
                "partition": part,
                "certificate": cert,
                "b_size": b.size(),
            });
            ctx.emit(result, &[cert])
        }
        Command::SoiReport { n, sample, seed } => {
            ctx.config.n = Some(*n);
            let kind = match sample {
                Some(count) => {
                    ctx.config.samples = Some(*count);
                    ctx.config.seed = Some(*seed);
                    PairSample::Random {
                        count: *count,
                        seed: *seed,
                    }
                }
                None => PairSample::All,
            };
            let r = soi_report(&ctx.lab, *n, t, kind)?;
            ctx.emit(serde_json::to_value(&r)?, &r.pairs)
        }
        Command::Selftest { n } => {
            ctx.config.n = Some(*n);
            let r = run_selftest(&ctx.lab, *n, t)?;
            ctx.emit(serde_json::to_value(&r)?, &r.checks)?;
            if r.passed() {
                Ok(())
            } else {
                let failed: Vec<&str> = r
                    .checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(|c| c.name.as_str())
                    .collect();
                Err(CliError::CheckFailed(format!(
                    "selftest failed: {}",
                    failed.join(", ")
                )))
            }
        }
    }
}

fn run_cover(ctx: &mut Ctx, g: &Global, mode: &CoverMode) -> Result<(), CliError> {
    let t = g.t;
    let (candidate, save) = match mode {
        CoverMode::Random {
            n,
            alpha,
            samples,
            seed,
            save,
        } => {
            ctx.config.n = Some(*n);
            ctx.config.alpha = Some(*alpha);
            ctx.config.samples = Some(*samples);
            ctx.config.seed = Some(*seed);
            (
                random_covering(&ctx.lab, *n, *alpha, *samples, *seed, t)?,
                save,
            )
        }
        CoverMode::Greedy { n, alpha, save } => {
            ctx.config.n = Some(*n);
            ctx.config.alpha = Some(*alpha);
            (greedy_covering(&ctx.lab, *n, *alpha, t, max_n(g))?, save)
        }
        CoverMode::Verify { input } => {
            let c = CoverCandidate::from_json(&fs::read_to_string(input)?)?;
            ctx.config.n = Some(c.n);
            ctx.config.alpha = Some(c.alpha);
            if c.t != t {
                log::warn!("candidate was built with t = {}, verifying at t = {t}", c.t);
            }
            let c = CoverCandidate { t, ..c };
            (c, &None)
        }
    };
    if let Some(path) = save {
        fs::write(path, candidate.to_json()?)?;
    }
    let verdict = verify_covering(&ctx.lab, &candidate)?;
    let rows: Vec<StringRow> = candidate
        .centers
        .iter()
        .map(|s| StringRow { string: s.clone() })
        .collect();
    let covers = verdict.covers;
    let uncovered = verdict.uncovered.len();
    ctx.emit(json!({ "candidate": candidate, "verdict": verdict }), &rows)?;
    if matches!(mode, CoverMode::Verify { .. }) && !covers {
        return Err(CliError::CheckFailed(format!(
            "cover leaves {uncovered} strings uncovered"
        )));
    }
    Ok(())
}
