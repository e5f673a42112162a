//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on operational errors, 2 on usage errors.
//! Machine-readable lines are `ok <name> <path>`, `failed <name> <error>`
//! and `time_s <seconds>`.

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bench;
use crate::blocktree::BlockPath;
use crate::codein::{self, InsertionRequest, Placement};
use crate::confi::{self, ConfigEdit, EditOutcome, WaitPolicy};
use crate::registry::Registry;
use crate::scaffold::{validate_name, ProjectSpec, Scaffolder};
use crate::templates::{TemplateLibrary, DEFAULT_SET};

pub const WORKSPACE_ENV: &str = "SPIDERFORGE_WORKSPACE";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "spiderforge",
    version,
    about = "Generate and patch crawler projects"
)]
pub struct Cli {
    /// Workspace holding spiders.json and the spiders/ directory.
    #[arg(long, env = WORKSPACE_ENV, default_value = ".", global = true)]
    pub workspace: PathBuf,
    /// Registry file (default: <workspace>/spiders.json).
    #[arg(long, global = true)]
    pub registry: Option<PathBuf>,
    /// Extra directory searched for template sets.
    #[arg(long, global = true)]
    pub templates: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one project.
    New(NewArgs),
    /// Generate every project of a JSON manifest.
    Batch(BatchArgs),
    /// Read or edit a settings key: `config <project> set|toggle|get KEY [VALUE]`.
    Config(ConfigArgs),
    /// Insert code into a block of a project file.
    Insert(InsertArgs),
    /// List registered projects.
    List(ListArgs),
    /// Time throwaway generations.
    Bench(BenchArgs),
}

fn parse_name(s: &str) -> Result<String, String> {
    validate_name(s).map(|()| s.to_string())
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    if k.trim().is_empty() {
        return Err(format!("empty key in {s:?}"));
    }
    Ok((k.trim().to_string(), v.trim().to_string()))
}

#[derive(Debug, Args)]
pub struct NewArgs {
    #[arg(value_parser = parse_name)]
    pub name: String,
    #[arg(long, default_value = DEFAULT_SET)]
    pub template_set: String,
    #[arg(long, value_parser = parse_name)]
    pub spider_name: Option<String>,
    #[arg(long = "domain")]
    pub domains: Vec<String>,
    #[arg(long = "url")]
    pub urls: Vec<String>,
    /// Settings override, repeatable.
    #[arg(long = "config", value_name = "KEY=VALUE", value_parser = parse_pair)]
    pub config: Vec<(String, String)>,
    /// Parent directory of the project (default: <workspace>/spiders).
    #[arg(long)]
    pub target_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    pub manifest: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Edit this settings file instead of a registered project's.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// `[PROJECT] ACTION KEY [VALUE]`; PROJECT is omitted with --file.
    #[arg(required = true, num_args = 1.., allow_hyphen_values = true)]
    pub args: Vec<String>,
}

#[derive(Debug, Args)]
pub struct InsertArgs {
    /// Registered project; its spider source is edited unless --in is given.
    #[arg(required_unless_present = "file", conflicts_with = "file")]
    pub project: Option<String>,
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// File inside the project package, e.g. `items.py`.
    #[arg(long = "in", requires = "project")]
    pub in_file: Option<PathBuf>,
    /// Block header signature, outermost first; repeatable.
    #[arg(long = "block", required = true)]
    pub blocks: Vec<String>,
    /// Code line to insert; repeatable.
    #[arg(long = "code", required = true)]
    pub code: Vec<String>,
    #[arg(long, default_value = "back")]
    pub placement: Placement,
}

#[derive(Debug, Args)]
pub struct ListArgs {
    /// Name glob, e.g. `de*`.
    pub filter: Option<String>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(value_parser = clap::value_parser!(u32).range(1..))]
    pub count: u32,
    #[arg(long)]
    pub with_config: bool,
}

struct Context<'a> {
    scaffolder: Scaffolder,
    registry: Registry,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

enum Failure {
    Usage(String),
    Operational(String),
}

fn op(e: impl Display) -> Failure {
    Failure::Operational(e.to_string())
}

type CmdResult = Result<i32, Failure>;

/// Parse `args` (program name first) and run; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let registry = match &cli.registry {
        Some(path) => Registry::open(path),
        None => Registry::in_workspace(&cli.workspace),
    };
    let mut library = TemplateLibrary::new();
    if let Some(dir) = &cli.templates {
        library = library.with_dir(dir);
    }
    library = library.with_dir(cli.workspace.join("templates"));
    let scaffolder = Scaffolder::new(&cli.workspace)
        .with_registry(registry.clone())
        .with_library(library);
    let mut ctx = Context {
        scaffolder,
        registry,
        out,
        err,
    };
    let result = match cli.command {
        Command::New(a) => cmd_new(&mut ctx, a),
        Command::Batch(a) => cmd_batch(&mut ctx, a),
        Command::Config(a) => cmd_config(&mut ctx, a),
        Command::Insert(a) => cmd_insert(&mut ctx, a),
        Command::List(a) => cmd_list(&mut ctx, a),
        Command::Bench(a) => cmd_bench(&mut ctx, a),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(ctx.err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Operational(msg)) => {
            let _ = writeln!(ctx.err, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn cmd_new(ctx: &mut Context<'_>, a: NewArgs) -> CmdResult {
    let spec = ProjectSpec {
        name: a.name,
        spider_name: a.spider_name,
        allowed_domains: a.domains,
        start_urls: a.urls,
        template_set: a.template_set,
        target_dir: a.target_dir,
        config_overrides: a.config,
    };
    let project = ctx.scaffolder.generate_project(&spec).map_err(op)?;
    let _ = writeln!(ctx.out, "ok {} {}", project.name, project.root.display());
    Ok(EXIT_OK)
}

fn cmd_batch(ctx: &mut Context<'_>, a: BatchArgs) -> CmdResult {
    let text = fs::read_to_string(&a.manifest).map_err(|e| {
        Failure::Usage(format!(
            "cannot read manifest {}: {e}",
            a.manifest.display()
        ))
    })?;
    let specs: Vec<ProjectSpec> = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("invalid manifest {}: {e}", a.manifest.display())))?;
    let report = ctx.scaffolder.generate_batch(&specs, a.jobs.into());
    for outcome in &report.outcomes {
        let _ = match &outcome.result {
            Ok(p) => writeln!(ctx.out, "ok {} {}", outcome.name, p.root.display()),
            Err(e) => writeln!(ctx.out, "failed {} {}", outcome.name, e),
        };
    }
    let _ = writeln!(ctx.out, "time_s {:.6}", report.elapsed.as_secs_f64());
    Ok(if report.all_ok() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

/// Settings file plus the project name to log edits against.
fn resolve_settings(
    ctx: &Context<'_>,
    file: Option<PathBuf>,
    project: Option<&str>,
) -> Result<(PathBuf, Option<String>), Failure> {
    if let Some(file) = file {
        return Ok((file, None));
    }
    let name = project.expect("project given when --file is absent");
    let entry = ctx
        .registry
        .get(name)
        .map_err(op)?
        .ok_or_else(|| Failure::Operational(format!("unknown project {name:?}")))?;
    Ok((entry.settings_path(), Some(entry.name)))
}

fn cmd_config(ctx: &mut Context<'_>, a: ConfigArgs) -> CmdResult {
    let mut args = a.args.as_slice();
    let project = if a.file.is_none() {
        let (first, rest) = args
            .split_first()
            .ok_or_else(|| Failure::Usage("missing project name".into()))?;
        args = rest;
        Some(first.as_str())
    } else {
        None
    };
    let usage = || Failure::Usage("expected `set KEY VALUE`, `toggle KEY` or `get KEY`".into());
    let (action, key, value) = match args {
        [action, key] => (action.as_str(), key.as_str(), None),
        [action, key, value] => (action.as_str(), key.as_str(), Some(value.as_str())),
        _ => return Err(usage()),
    };
    match (action, value) {
        ("set", Some(_)) | ("toggle", None) | ("get", None) => {}
        _ => return Err(usage()),
    }
    let (path, name) = resolve_settings(ctx, a.file, project)?;
    let wait = WaitPolicy::default();

    match action {
        "get" => {
            let v = confi::get_option(&path, key).map_err(op)?;
            let state = if v.commented { "commented" } else { "active" };
            let cont = if v.continued { " ..." } else { "" };
            let _ = writeln!(ctx.out, "{key} = {}{cont} ({state})", v.option);
        }
        "set" => {
            let value = value.expect("checked above");
            let report =
                confi::apply_edit(&path, &ConfigEdit::set(key, value), &wait).map_err(op)?;
            if let Some(name) = &name {
                ctx.registry.log_config_edit(name, key, value).map_err(op)?;
            }
            let how = if report.outcome == EditOutcome::Appended {
                "appended"
            } else {
                "updated"
            };
            let _ = writeln!(ctx.out, "{how} {key} = {value}");
        }
        "toggle" => {
            let report = confi::apply_edit(&path, &ConfigEdit::toggle(key), &wait).map_err(op)?;
            if report.outcome == EditOutcome::KeyNotFound {
                return Err(Failure::Operational(format!(
                    "key {key:?} not found in {}",
                    path.display()
                )));
            }
            if let Some(name) = &name {
                ctx.registry.log_config_edit(name, key, "#").map_err(op)?;
            }
            let v = confi::get_option(&path, key).map_err(op)?;
            let state = if v.commented { "commented" } else { "active" };
            let _ = writeln!(ctx.out, "toggled {key} ({state})");
        }
        _ => unreachable!("action validated"),
    }
    Ok(EXIT_OK)
}

fn cmd_insert(ctx: &mut Context<'_>, a: InsertArgs) -> CmdResult {
    let path = match (&a.file, &a.project) {
        (Some(file), _) => file.clone(),
        (None, Some(name)) => {
            let entry = ctx
                .registry
                .get(name)
                .map_err(op)?
                .ok_or_else(|| Failure::Operational(format!("unknown project {name:?}")))?;
            match &a.in_file {
                Some(rel) => entry.package_dir().join(rel),
                None => entry.spider_path(),
            }
        }
        (None, None) => unreachable!("clap requires project or --file"),
    };
    let block_path = BlockPath::new(a.blocks).map_err(|e| Failure::Usage(e.to_string()))?;
    let request = InsertionRequest::new(&path, block_path, a.code)
        .map_err(|e| Failure::Usage(e.to_string()))?
        .placement(a.placement);
    if !Path::new(&path).is_file() {
        return Err(Failure::Operational(format!(
            "{} does not exist",
            path.display()
        )));
    }
    codein::insert_in_block(&request).map_err(op)?;
    let _ = writeln!(ctx.out, "ok {}", path.display());
    Ok(EXIT_OK)
}

fn cmd_list(ctx: &mut Context<'_>, a: ListArgs) -> CmdResult {
    let entries = ctx
        .registry
        .list_projects(a.filter.as_deref())
        .map_err(op)?;
    for e in entries {
        let _ = writeln!(
            ctx.out,
            "{}\t{}\t{}\t{}\t{}",
            e.name,
            e.root.display(),
            e.template_set,
            e.created_at.to_rfc3339(),
            if e.change_once_applied {
                "initialized"
            } else {
                "pending"
            },
        );
    }
    Ok(EXIT_OK)
}

fn cmd_bench(ctx: &mut Context<'_>, a: BenchArgs) -> CmdResult {
    let result = bench::run_bench(a.count as usize, a.with_config).map_err(op)?;
    let _ = write!(ctx.out, "{}", result.table());
    let _ = writeln!(ctx.out, "time_s {:.6}", result.elapsed.as_secs_f64());
    Ok(EXIT_OK)
}
