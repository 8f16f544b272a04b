//! Command-line front end: reads an instance document, runs the matching
//! solver, prints a table and optionally writes a JSON result document.
//!
//! Exit codes: 0 success, 1 model-level infeasibility, 2 usage or parse
//! errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use rekit::instance::{
    bundled, parse_instance, Instance, InstanceBody, MckpDoc, MorphologyDoc, RestructureDoc,
};
use rekit::model::{Composition, MorphStructure};
use rekit::netassign::{self, Assignment, AssignmentInstance, Linkage, Strategy};
use rekit::num;
use rekit::planner::{self, MckpInstance, MultiMode, MultiOutcome, Selection};
use rekit::restructure::{restructure_mckp, restructure_subset};
use rekit::{recolor, synthesis, trees, Error};

/// Environment variable naming a directory searched for instance files.
pub const EXAMPLES_ENV: &str = "REKIT_EXAMPLES";

#[derive(Debug, Parser)]
#[command(name = "rekit", version, about = "Combinatorial reengineering toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Instance document (JSON).
    file: PathBuf,
    /// Write the JSON result document here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reserved; every solver is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Greedy,
    Exact,
    Pareto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Separate,
    Joint,
    Border,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LinkageArg {
    Single,
    Complete,
    Average,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pareto-efficient compositions of a morphological structure.
    Synth {
        #[command(flatten)]
        common: Common,
    },
    /// Budgeted improvement plan (morphology or mckp document).
    Improve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        budget: Option<f64>,
        #[arg(long, value_enum, default_value = "exact")]
        method: Method,
    },
    /// Move an initial solution toward a goal under a change budget.
    Restructure {
        #[command(flatten)]
        common: Common,
        /// Change-cost budget.
        #[arg(long)]
        hmax: Option<f64>,
    },
    /// Budgeted recoloring toward a goal coloring.
    Recolor {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Greedy hotlink assignment.
    Hotlink {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Budgeted Steiner point selection.
    Steiner {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Agglomerative clustering of regions.
    Cluster {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, value_enum)]
        linkage: Option<LinkageArg>,
    },
    /// User to access point assignment and network extension.
    Assign {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "joint")]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 0.0)]
        radius: f64,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Synth { common }
            | Command::Improve { common, .. }
            | Command::Restructure { common, .. }
            | Command::Recolor { common, .. }
            | Command::Hotlink { common, .. }
            | Command::Steiner { common, .. }
            | Command::Cluster { common, .. }
            | Command::Assign { common, .. } => common,
        }
    }
}

/// Failure of one invocation.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Infeasible(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Infeasible(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Infeasible(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_infeasible() {
            Failure::Infeasible(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Report of one run: the table printed to stdout and the result document.
pub struct Report {
    pub table: String,
    pub document: Value,
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                ErrorKind::InvalidSubcommand => {
                    let name = e
                        .get(clap::error::ContextKind::InvalidSubcommand)
                        .map(|v| v.to_string())
                        .unwrap_or_default();
                    let _ = writeln!(err, "rekit: unknown subcommand '{name}'");
                    2
                }
                _ => {
                    let rendered = e.to_string();
                    let line = rendered.lines().next().unwrap_or("usage error");
                    let _ = writeln!(err, "rekit: {}", line.trim_start_matches("error: "));
                    2
                }
            };
        }
    };
    match execute(&cli.command) {
        Ok(report) => {
            if let Some(path) = &cli.command.common().out {
                let text = serde_json::to_string_pretty(&report.document)
                    .expect("values serialize")
                    + "\n";
                if let Err(e) = std::fs::write(path, text) {
                    let _ = writeln!(err, "rekit: cannot write {}: {e}", path.display());
                    return 2;
                }
            }
            let _ = out.write_all(report.table.as_bytes());
            0
        }
        Err(f) => {
            let _ = writeln!(err, "rekit: {}", f.message().replace('\n', " "));
            f.code()
        }
    }
}

/// Finds an instance file: the literal path, then the directory named by
/// `REKIT_EXAMPLES`, then the bundled examples (for bare names or paths
/// under an `examples` directory).
pub fn load_text(path: &Path) -> Result<String, Failure> {
    if path.is_file() {
        return std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read {}: {e}", path.display())));
    }
    if let (Some(dir), Some(name)) = (std::env::var_os(EXAMPLES_ENV), path.file_name()) {
        let candidate = Path::new(&dir).join(name);
        if candidate.is_file() {
            return std::fs::read_to_string(&candidate)
                .map_err(|e| usage(format!("cannot read {}: {e}", candidate.display())));
        }
    }
    let parent_ok = path
        .parent()
        .is_none_or(|p| p.as_os_str().is_empty() || p.file_name().is_some_and(|n| n == "examples"));
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default();
    let ext_ok = path.extension().is_none_or(|e| e == "json");
    match bundled::get(stem) {
        Some(text) if parent_ok && ext_ok => Ok(text.to_string()),
        _ => Err(usage(format!("no such file: {}", path.display()))),
    }
}

fn load(path: &Path) -> Result<Instance, Failure> {
    let text = load_text(path)?;
    parse_instance(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn wrong_kind(command: &str, inst: &Instance) -> Failure {
    usage(format!(
        "{command} does not accept {} documents",
        inst.body.kind()
    ))
}

/// Runs a parsed command without touching stdout or files.
fn execute(cmd: &Command) -> Result<Report, Failure> {
    let inst = load(&cmd.common().file)?;
    let (name, (table, mut doc)) = match (cmd, &inst.body) {
        (Command::Synth { .. }, InstanceBody::Morphology(d)) => ("synth", synth(d)?),
        (Command::Improve { budget, method, .. }, InstanceBody::Morphology(d)) => {
            ("improve", improve_morphology(d, *budget, *method)?)
        }
        (Command::Improve { budget, method, .. }, InstanceBody::Mckp(d)) => {
            ("improve", improve_mckp(d, *budget, *method)?)
        }
        (Command::Restructure { hmax, .. }, InstanceBody::Restructure(d)) => {
            ("restructure", restructure(d, *hmax)?)
        }
        (Command::Recolor { budget, .. }, InstanceBody::Recolor(d)) => {
            ("recolor", recolor_cmd(d, *budget)?)
        }
        (Command::Hotlink { count, .. }, InstanceBody::Tree(d)) => ("hotlink", hotlink(d, *count)?),
        (Command::Steiner { budget, .. }, InstanceBody::Steiner(d)) => {
            ("steiner", steiner(d, *budget)?)
        }
        (
            Command::Cluster {
                threshold, linkage, ..
            },
            InstanceBody::Cluster(d),
        ) => ("cluster", cluster(d, *threshold, *linkage)?),
        (
            Command::Assign {
                strategy, radius, ..
            },
            InstanceBody::Network(d),
        ) => ("assign", assign(d, *strategy, *radius)?),
        (cmd, _) => return Err(wrong_kind(command_name(cmd), &inst)),
    };
    let obj = doc.as_object_mut().expect("result documents are objects");
    obj.insert("command".into(), Value::from(name));
    obj.insert("kind".into(), Value::from(inst.body.kind()));
    Ok(Report {
        table,
        document: doc,
    })
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Synth { .. } => "synth",
        Command::Improve { .. } => "improve",
        Command::Restructure { .. } => "restructure",
        Command::Recolor { .. } => "recolor",
        Command::Hotlink { .. } => "hotlink",
        Command::Steiner { .. } => "steiner",
        Command::Cluster { .. } => "cluster",
        Command::Assign { .. } => "assign",
    }
}

/// JSON number with integers printed without a fraction; infinity as a
/// string.
fn jnum(x: f64) -> Value {
    if x.is_infinite() {
        return Value::from(num::fmt(x));
    }
    let r = num::round(x);
    if r.fract() == 0.0 && r.abs() < 1e15 {
        Value::from(r as i64)
    } else {
        Value::from(r)
    }
}

fn check_budget(b: Option<f64>) -> Result<(), Failure> {
    match b {
        Some(x) if x.is_nan() || x < 0.0 => {
            Err(usage(format!("budget must be nonnegative, got {x}")))
        }
        _ => Ok(()),
    }
}

type Out = (String, Value);

fn synth(d: &MorphologyDoc) -> Result<Out, Failure> {
    let ms = d.structure()?;
    let frontier = synthesis::pareto_synthesize(&ms);
    let mut table = format!("feasible compositions: {}\n", frontier.feasible);
    let mut members = Vec::new();
    if frontier.is_infeasible() {
        return Err(Failure::Infeasible(
            "no composition is pairwise compatible".into(),
        ));
    }
    table.push_str("Pareto-efficient compositions:\n");
    for m in &frontier.members {
        let label = m.composition.label(&ms);
        table.push_str(&format!("  {label}  N = {}\n", m.quality));
        members.push(json!({"composition": label, "quality": m.quality.to_string(), "w": m.quality.w, "n": m.quality.n}));
    }
    let mut doc = json!({"feasible": frontier.feasible, "frontier": members});
    if let Some(c) = d.composition(&ms)? {
        let q = synthesis::evaluate(&ms, &c)?;
        let bottlenecks = synthesis::detect_bottlenecks(&ms, &c)?;
        table.push_str(&format!("composition {}  N = {q}\n", c.label(&ms)));
        for b in &bottlenecks {
            table.push_str(&format!("  bottleneck {}\n", b.label()));
        }
        doc["composition"] = json!({
            "composition": c.label(&ms),
            "quality": q.to_string(),
            "bottlenecks": bottlenecks.iter().map(|b| b.label()).collect::<Vec<_>>(),
        });
    }
    Ok((table, doc))
}

fn selection_table(inst: &MckpInstance, s: &Selection) -> (String, Vec<Value>) {
    let mut table = String::from("group  item  cost  profit\n");
    let mut rows = Vec::new();
    for (g, it) in inst.chosen_items(s) {
        table.push_str(&format!(
            "{}  {}  {}  {}\n",
            g.id,
            it.id,
            num::fmt(it.cost),
            num::fmt(it.profit)
        ));
        rows.push(
            json!({"group": g.id, "item": it.id, "cost": jnum(it.cost), "profit": jnum(it.profit)}),
        );
    }
    table.push_str(&format!(
        "total cost {}  total profit {}\nplan {}\n",
        num::fmt(s.total_cost),
        num::fmt(s.total_profit),
        inst.plan_label(s)
    ));
    (table, rows)
}

fn solve_scalar(inst: &MckpInstance, method: Method) -> Result<Selection, Failure> {
    match method {
        Method::Greedy => Ok(planner::mckp_greedy(inst)?),
        Method::Exact => Ok(planner::mckp_exact(inst)?),
        Method::Pareto => Err(usage("--method pareto needs profit vectors with senses")),
    }
}

fn improve_morphology(
    d: &MorphologyDoc,
    budget: Option<f64>,
    method: Method,
) -> Result<Out, Failure> {
    check_budget(budget)?;
    let ms: MorphStructure = d.structure()?;
    let c: Composition = d
        .composition(&ms)?
        .ok_or_else(|| usage("the morphology document names no composition to improve"))?;
    let before = synthesis::evaluate(&ms, &c)?;
    let bottlenecks = synthesis::detect_bottlenecks(&ms, &c)?;
    let budget = budget.or(d.budget).unwrap_or(0.0);
    let inst = synthesis::generate_actions(&bottlenecks, &d.catalog()?)?.with_budget(budget);
    let s = solve_scalar(&inst, method)?;
    let (_, after) = planner::apply_actions(&ms, &c, &inst, &s)?;
    let (mut table, rows) = selection_table(&inst, &s);
    table = format!(
        "composition {}  budget {}\n{table}",
        c.label(&ms),
        num::fmt(budget)
    );
    table.push_str(&format!("quality before {before}  after {after}\n"));
    Ok((
        table,
        json!({
            "composition": c.label(&ms),
            "budget": jnum(budget),
            "method": format!("{method:?}").to_lowercase(),
            "selection": rows,
            "total_cost": jnum(s.total_cost),
            "total_profit": jnum(s.total_profit),
            "plan": inst.plan_label(&s),
            "quality_before": before.to_string(),
            "quality_after": after.to_string(),
        }),
    ))
}

fn improve_mckp(d: &MckpDoc, budget: Option<f64>, method: Method) -> Result<Out, Failure> {
    check_budget(budget)?;
    let mut inst = d.instance()?;
    if let Some(b) = budget {
        inst.budget = b;
    }
    let method_name = format!("{method:?}").to_lowercase();
    match (method, &d.senses) {
        (Method::Pareto, Some(senses)) => {
            let MultiOutcome::Front(front) =
                planner::mckp_multicriteria(&inst, senses, &MultiMode::Pareto)?
            else {
                unreachable!("pareto mode yields a front")
            };
            let mut table = format!(
                "budget {}  non-dominated plans: {}\n",
                num::fmt(inst.budget),
                front.len()
            );
            let mut rows = Vec::new();
            for v in &front {
                let profits: Vec<String> = v.profits.iter().map(|x| num::fmt(*x)).collect();
                table.push_str(&format!(
                    "  {}  ({})\n",
                    inst.plan_label(&v.selection),
                    profits.join(", ")
                ));
                rows.push(json!({
                    "plan": inst.plan_label(&v.selection),
                    "profits": v.profits.iter().map(|x| jnum(*x)).collect::<Vec<_>>(),
                    "total_cost": jnum(v.selection.total_cost),
                }));
            }
            Ok((
                table,
                json!({"budget": jnum(inst.budget), "method": method_name, "front": rows}),
            ))
        }
        (_, Some(senses)) if d.weights.is_some() && method == Method::Exact => {
            let weights = d.weights.clone().expect("checked");
            let MultiOutcome::Single(v) =
                planner::mckp_multicriteria(&inst, senses, &MultiMode::Weighted(weights))?
            else {
                unreachable!("weighted mode yields one plan")
            };
            let (mut table, rows) = selection_table(&inst, &v.selection);
            let profits: Vec<String> = v.profits.iter().map(|x| num::fmt(*x)).collect();
            table.push_str(&format!("criteria ({})\n", profits.join(", ")));
            Ok((
                table,
                json!({
                    "budget": jnum(inst.budget),
                    "method": "weighted",
                    "selection": rows,
                    "plan": inst.plan_label(&v.selection),
                    "profits": v.profits.iter().map(|x| jnum(*x)).collect::<Vec<_>>(),
                    "total_cost": jnum(v.selection.total_cost),
                }),
            ))
        }
        _ => {
            let s = solve_scalar(&inst, method)?;
            let (table, rows) = selection_table(&inst, &s);
            Ok((
                format!(
                    "budget {}  method {method_name}\n{table}",
                    num::fmt(inst.budget)
                ),
                json!({
                    "budget": jnum(inst.budget),
                    "method": method_name,
                    "selection": rows,
                    "total_cost": jnum(s.total_cost),
                    "total_profit": jnum(s.total_profit),
                    "plan": inst.plan_label(&s),
                }),
            ))
        }
    }
}

fn restructure(d: &RestructureDoc, hmax: Option<f64>) -> Result<Out, Failure> {
    check_budget(hmax)?;
    match d {
        RestructureDoc::Subset(doc) => {
            let p = doc.problem(hmax)?;
            let o = restructure_subset(&p)?;
            let members: Vec<&str> = p
                .elements
                .iter()
                .zip(&o.solution)
                .filter(|(_, &x)| x)
                .map(|(e, _)| e.id.as_str())
                .collect();
            let table = format!(
                "budget {}\nsolution {{{}}}\nchange cost {}  proximity {}\n",
                num::fmt(p.budget),
                members.join(", "),
                num::fmt(o.change_cost),
                num::fmt(o.proximity)
            );
            Ok((
                table,
                json!({"budget": jnum(p.budget), "solution": members, "change_cost": jnum(o.change_cost), "proximity": jnum(o.proximity)}),
            ))
        }
        RestructureDoc::Choice(doc) => {
            let p = doc.problem(hmax)?;
            let o = restructure_mckp(&p)?;
            let picks: Vec<&str> = p
                .groups
                .iter()
                .zip(&o.solution)
                .map(|(g, &j)| g.items[j].id.as_str())
                .collect();
            let table = format!(
                "budget {}\nsolution <{}>\nchange cost {}  proximity {}\n",
                num::fmt(p.budget),
                picks.join(" ⋆ "),
                num::fmt(o.change_cost),
                num::fmt(o.proximity)
            );
            Ok((
                table,
                json!({"budget": jnum(p.budget), "solution": picks, "change_cost": jnum(o.change_cost), "proximity": jnum(o.proximity)}),
            ))
        }
    }
}

fn recolor_cmd(d: &rekit::instance::RecolorDoc, budget: Option<f64>) -> Result<Out, Failure> {
    check_budget(budget)?;
    let inst = d.instance_with_budget(budget)?;
    let r = recolor::recolor_optimize(&inst)?;
    let names = |c: &[usize]| -> Vec<String> {
        inst.graph()
            .vertices()
            .iter()
            .zip(c)
            .map(|(v, &x)| format!("{v}{}", inst.colors()[x]))
            .collect()
    };
    let result = names(&r.configuration);
    let table = format!(
        "budget {}\ninitial  {}\ngoal     {}\nresult   {}\ncost {}  distance to goal {}  proper {}  exact {}\n",
        num::fmt(inst.budget()),
        names(inst.initial()).join(" "),
        names(inst.goal()).join(" "),
        result.join(" "),
        num::fmt(r.cost),
        r.distance,
        recolor::is_proper(inst.graph(), &r.configuration),
        r.exact
    );
    Ok((
        table,
        json!({
            "budget": jnum(inst.budget()),
            "configuration": result,
            "cost": jnum(r.cost),
            "distance": r.distance,
            "exact": r.exact,
        }),
    ))
}

fn hotlink(d: &rekit::instance::TreeDoc, count: usize) -> Result<Out, Failure> {
    let t = d.tree()?;
    let existing = d.hotlink_indices(&t)?;
    let plan = trees::extend_hotlinks_greedy(&t, &existing, count)?;
    let mut table = String::new();
    for &h in &existing {
        table.push_str(&format!(
            "existing hotlink {} -> {}\n",
            t.id(t.root()),
            t.id(h)
        ));
    }
    table.push_str(&format!(
        "expected path length {}\n",
        num::fmt(plan.lengths[0])
    ));
    for (h, len) in plan.hotlinks.iter().zip(&plan.lengths[1..]) {
        table.push_str(&format!(
            "  + hotlink {} -> {}  length {}\n",
            t.id(t.root()),
            t.id(*h),
            num::fmt(*len)
        ));
    }
    if plan.short {
        table.push_str(&format!(
            "only {} of {count} hotlinks available\n",
            plan.hotlinks.len()
        ));
    }
    Ok((
        table,
        json!({
            "existing": existing.iter().map(|&h| t.id(h)).collect::<Vec<_>>(),
            "hotlinks": plan.hotlinks.iter().map(|&h| t.id(h)).collect::<Vec<_>>(),
            "lengths": plan.lengths.iter().map(|x| jnum(*x)).collect::<Vec<_>>(),
            "short": plan.short,
        }),
    ))
}

fn steiner(d: &rekit::instance::SteinerDoc, budget: Option<f64>) -> Result<Out, Failure> {
    check_budget(budget)?;
    let mut inst = d.instance();
    if let Some(b) = budget {
        inst.budget = b;
    }
    let choice = trees::steiner_selection(&inst)?;
    let table = format!(
        "budget {}\npoints {{{}}}\ntotal cost {}  total profit {}\n",
        num::fmt(inst.budget),
        choice.points.join(", "),
        num::fmt(choice.selection.total_cost),
        num::fmt(choice.selection.total_profit)
    );
    Ok((
        table,
        json!({
            "budget": jnum(inst.budget),
            "points": choice.points,
            "total_cost": jnum(choice.selection.total_cost),
            "total_profit": jnum(choice.selection.total_profit),
        }),
    ))
}

fn cluster(
    d: &rekit::instance::ClusterDoc,
    threshold: Option<f64>,
    linkage: Option<LinkageArg>,
) -> Result<Out, Failure> {
    let threshold = threshold.unwrap_or(d.threshold);
    let linkage = match linkage {
        None => d.linkage,
        Some(LinkageArg::Single) => Linkage::Single,
        Some(LinkageArg::Complete) => Linkage::Complete,
        Some(LinkageArg::Average) => Linkage::Average,
    };
    let c = netassign::cluster_agglomerative(&d.points, linkage, threshold)?;
    let names: Vec<Vec<&str>> = c
        .clusters
        .iter()
        .map(|m| m.iter().map(|&i| d.points[i].id.as_str()).collect())
        .collect();
    let mut table =
        format!("linkage {linkage:?}  threshold {}\n", num::fmt(threshold)).to_lowercase();
    for m in &c.merges {
        let l: Vec<&str> = m.left.iter().map(|&i| d.points[i].id.as_str()).collect();
        let r: Vec<&str> = m.right.iter().map(|&i| d.points[i].id.as_str()).collect();
        table.push_str(&format!(
            "  merge {{{}}} + {{{}}} at {}\n",
            l.join(","),
            r.join(","),
            num::fmt(m.distance)
        ));
    }
    for m in &names {
        table.push_str(&format!("cluster {{{}}}\n", m.join(", ")));
    }
    Ok((
        table,
        json!({
            "linkage": format!("{linkage:?}").to_lowercase(),
            "threshold": jnum(threshold),
            "clusters": names,
            "merge_distances": c.merges.iter().map(|m| jnum(m.distance)).collect::<Vec<_>>(),
        }),
    ))
}

fn assignment_rows(inst: &AssignmentInstance, a: &Assignment) -> (String, Vec<Value>, Value) {
    let mut table = String::from("user  point  distance\n");
    let mut rows = Vec::new();
    for (i, p) in a.user_point.iter().enumerate() {
        let u = inst.users[i].id;
        match p {
            Some(j) => {
                let d = inst.distance(i, *j);
                table.push_str(&format!("{u}  {}  {:.1}\n", inst.points[*j].id, d));
                rows.push(json!({"user": u, "point": inst.points[*j].id}));
            }
            None => {
                table.push_str(&format!("{u}  -\n"));
                rows.push(json!({"user": u, "point": Value::Null}));
            }
        }
    }
    let mut loads = Map::new();
    table.push_str("point  bandwidth  users\n");
    for (j, l) in a.loads(inst).iter().enumerate() {
        let p = &inst.points[j];
        table.push_str(&format!(
            "{}  {}/{}  {}/{}\n",
            p.id,
            num::fmt(l.bandwidth),
            num::fmt(p.bandwidth),
            l.users,
            p.max_users
        ));
        loads.insert(
            p.id.to_string(),
            json!({"bandwidth": jnum(l.bandwidth), "users": l.users}),
        );
    }
    (table, rows, Value::Object(loads))
}

fn assign(
    d: &rekit::instance::NetworkDoc,
    strategy: StrategyArg,
    radius: f64,
) -> Result<Out, Failure> {
    let params = &d.outranking;
    match &d.regions[..] {
        [r] => {
            let inst = r.instance();
            let a = netassign::assign_users(&inst, params)?;
            let (table, rows, loads) = assignment_rows(&inst, &a);
            Ok((
                format!(
                    "assigned {} of {} users\n{table}",
                    a.assigned_count(),
                    inst.users.len()
                ),
                json!({"assignment": rows, "loads": loads, "assigned": a.assigned_count()}),
            ))
        }
        [a, b] => {
            let strategy = match strategy {
                StrategyArg::Separate => Strategy::Separate,
                StrategyArg::Joint => Strategy::Joint,
                StrategyArg::Border => Strategy::Border { radius },
            };
            let (ia, ib) = (a.instance(), b.instance());
            let ext = netassign::extend(&ia, &ib, strategy, params)?;
            let separate = netassign::extend(&ia, &ib, Strategy::Separate, params)?;
            let diff =
                netassign::reassigned_users(&ext.merged, &separate.assignment, &ext.assignment);
            let (rows_table, rows, loads) = assignment_rows(&ext.merged, &ext.assignment);
            let strategy_name = match strategy {
                Strategy::Separate => "separate".to_string(),
                Strategy::Joint => "joint".to_string(),
                Strategy::Border { radius } => format!("border (radius {})", num::fmt(radius)),
            };
            let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(", ");
            let mut table = format!(
                "strategy {strategy_name}  assigned {} of {} users (separate: {})\n{rows_table}",
                ext.assignment.assigned_count(),
                ext.merged.users.len(),
                separate.assignment.assigned_count()
            );
            if !ext.released.is_empty() {
                table.push_str(&format!("released users {{{}}}\n", join(&ext.released)));
            }
            table.push_str(&format!(
                "re-assigned relative to separate {{{}}}\n",
                join(&diff)
            ));
            let mut doc = json!({
                "strategy": strategy_name,
                "assignment": rows,
                "loads": loads,
                "assigned": ext.assignment.assigned_count(),
                "separate_assigned": separate.assignment.assigned_count(),
                "released": ext.released,
                "reassigned": diff,
            });
            if let Some(reported) = &d.reported_reassigned {
                let ours: std::collections::BTreeSet<u32> = diff.iter().copied().collect();
                let theirs: std::collections::BTreeSet<u32> = reported.iter().copied().collect();
                let only_ours: Vec<u32> = ours.difference(&theirs).copied().collect();
                let only_reported: Vec<u32> = theirs.difference(&ours).copied().collect();
                table.push_str(&format!(
                    "reported {{{}}}  only here {{{}}}  only reported {{{}}}\n",
                    join(reported),
                    join(&only_ours),
                    join(&only_reported)
                ));
                doc["reported_comparison"] = json!({
                    "reported": reported,
                    "only_here": only_ours,
                    "only_reported": only_reported,
                });
            }
            Ok((table, doc))
        }
        _ => Err(usage("a network document has one or two regions")),
    }
}
