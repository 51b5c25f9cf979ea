//! Corpus benchmarking: analyze every program in a directory and compare the
//! verdicts against an expected-verdict manifest.
//!
//! The manifest groups programs (one group per property family) and records,
//! per program, either the four expected verdicts or the fact that the
//! frontend must reject it as out of scope. Verdicts are compared exactly;
//! any difference, missing file, or unlisted program is a mismatch and flips
//! the exit code to 1.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Context as _;
use probcert_core::context::AnalysisSettings;
use probcert_core::frontend::parse_program;
use probcert_core::rules::{analyze, Goal, Outcome};
use probcert_core::AnalysisContext;
use serde::{Deserialize, Serialize};

use crate::report::SCHEMA_VERSION;

/// Expected-verdict manifest, deserialized from TOML.
#[derive(Debug, Deserialize)]
pub struct Manifest {
    pub programs: BTreeMap<String, Expected>,
}

#[derive(Debug, Deserialize)]
pub struct Expected {
    pub group: String,
    /// The frontend must refuse this program as out of scope.
    #[serde(default)]
    pub rejected: bool,
    /// Expected verdicts with relaxation on.
    #[serde(default)]
    pub expect: Option<ExpectedVerdicts>,
    /// Expected verdicts with relaxation off.
    #[serde(default)]
    pub expect_light: Option<ExpectedVerdicts>,
}

#[derive(Debug, Deserialize)]
pub struct ExpectedVerdicts {
    pub past: String,
    pub ast: String,
    pub non_ast: String,
    pub non_past: String,
}

impl ExpectedVerdicts {
    fn get(&self, goal: Goal) -> &str {
        match goal {
            Goal::Past => &self.past,
            Goal::Ast => &self.ast,
            Goal::NonAst => &self.non_ast,
            Goal::NonPast => &self.non_past,
        }
    }
}

/// Result of analyzing one corpus file.
#[derive(Debug, Serialize)]
struct Row {
    name: String,
    group: String,
    status: &'static str,
    rejection: Option<String>,
    verdicts: Option<BTreeMap<String, String>>,
    /// Rule that produced the certificate of the group's headline goal.
    #[serde(skip)]
    headline_rule: Option<String>,
    #[serde(skip)]
    headline_certified: bool,
    mismatches: Vec<String>,
}

#[derive(Debug, Serialize)]
struct GroupSummary {
    group: String,
    total: usize,
    certified: usize,
    rejected: usize,
}

#[derive(Debug, Serialize)]
struct BenchDoc {
    schema_version: u32,
    directory: String,
    relaxation: bool,
    programs: Vec<Row>,
    groups: Vec<GroupSummary>,
    mismatches: usize,
}

/// The goal whose certification a group's checkmark reports.
fn headline_goal(group: &str) -> Goal {
    match group {
        "ast" => Goal::Ast,
        "nast" => Goal::NonAst,
        "npast" => Goal::NonPast,
        _ => Goal::Past,
    }
}

fn group_order(group: &str) -> (u8, String) {
    let rank = match group {
        "past" => 0,
        "ast" => 1,
        "nast" => 2,
        _ => 3,
    };
    (rank, group.to_string())
}

pub fn run(
    dir: &Path,
    expected: Option<&Path>,
    json: bool,
    relaxation: bool,
    timeout: u64,
) -> anyhow::Result<std::process::ExitCode> {
    let manifest: Option<Manifest> = match expected {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read manifest {}", path.display()))?;
            Some(toml::from_str(&text).with_context(|| format!("malformed manifest {}", path.display()))?)
        }
        None => None,
    };

    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot read directory {}", dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "prob").unwrap_or(false))
        .collect();
    files.sort();
    anyhow::ensure!(!files.is_empty(), "no .prob programs in {}", dir.display());

    let mut rows: Vec<Row> = Vec::new();
    for file in &files {
        let name = file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let entry = manifest.as_ref().and_then(|m| m.programs.get(&name));
        let group = entry.map(|e| e.group.clone()).unwrap_or_else(|| "ungrouped".to_string());
        let source = fs::read_to_string(file)
            .with_context(|| format!("cannot read {}", file.display()))?;

        let mut row = match parse_program(&source) {
            Err(err) => Row {
                name: name.clone(),
                group,
                status: "rejected",
                rejection: Some(err.to_string()),
                verdicts: None,
                headline_rule: None,
                headline_certified: false,
                mismatches: Vec::new(),
            },
            Ok(program) => {
                let settings = AnalysisSettings {
                    relaxation,
                    timeout: if timeout == 0 { None } else { Some(Duration::from_secs(timeout)) },
                    ..Default::default()
                };
                let ctx = AnalysisContext::new(program, settings);
                let analysis = analyze(&ctx, &Goal::all());
                let verdicts: BTreeMap<String, String> = analysis
                    .verdicts
                    .iter()
                    .map(|v| {
                        let result = match v.result {
                            Outcome::Certified => "certified",
                            Outcome::Unknown => "unknown",
                        };
                        (v.goal.render().to_string(), result.to_string())
                    })
                    .collect();
                let headline = analysis.verdict(headline_goal(&group));
                let headline_certified =
                    headline.map(|v| v.result == Outcome::Certified).unwrap_or(false);
                let headline_rule = headline
                    .filter(|v| v.result == Outcome::Certified)
                    .map(|v| v.rule.render().to_string());
                Row {
                    name: name.clone(),
                    group,
                    status: "analyzed",
                    rejection: None,
                    verdicts: Some(verdicts),
                    headline_rule,
                    headline_certified,
                    mismatches: Vec::new(),
                }
            }
        };

        if let Some(entry) = entry {
            compare(&mut row, entry, relaxation);
        } else if manifest.is_some() {
            row.mismatches.push(format!("{name}: not listed in the manifest"));
        }
        rows.push(row);
    }

    // Manifest entries whose files are missing are mismatches too.
    let mut missing: Vec<String> = Vec::new();
    if let Some(manifest) = &manifest {
        for name in manifest.programs.keys() {
            if !rows.iter().any(|r| &r.name == name) {
                missing.push(format!("{name}: listed in the manifest but not found in {}", dir.display()));
            }
        }
    }

    let mut groups: Vec<GroupSummary> = Vec::new();
    {
        let mut names: Vec<String> = rows.iter().map(|r| r.group.clone()).collect();
        names.sort_by_key(|g| group_order(g));
        names.dedup();
        for group in names {
            let members: Vec<&Row> = rows.iter().filter(|r| r.group == group).collect();
            groups.push(GroupSummary {
                group: group.clone(),
                total: members.len(),
                certified: members.iter().filter(|r| r.headline_certified).count(),
                rejected: members.iter().filter(|r| r.status == "rejected").count(),
            });
        }
    }

    let mismatch_count =
        rows.iter().map(|r| r.mismatches.len()).sum::<usize>() + missing.len();

    if json {
        let doc = BenchDoc {
            schema_version: SCHEMA_VERSION,
            directory: dir.display().to_string(),
            relaxation,
            programs: rows,
            groups,
            mismatches: mismatch_count,
        };
        crate::emit(&serde_json::to_string_pretty(&doc)?);
    } else {
        crate::emit(&render(&rows, &groups, &missing, relaxation, manifest.is_some()));
    }

    if mismatch_count > 0 {
        Ok(std::process::ExitCode::from(1))
    } else {
        Ok(std::process::ExitCode::SUCCESS)
    }
}

fn compare(row: &mut Row, entry: &Expected, relaxation: bool) {
    if entry.rejected {
        if row.status != "rejected" {
            row.mismatches
                .push(format!("{}: expected the frontend to reject it, but it was analyzed", row.name));
        }
        return;
    }
    if row.status == "rejected" {
        row.mismatches.push(format!(
            "{}: unexpectedly rejected ({})",
            row.name,
            row.rejection.as_deref().unwrap_or("no reason")
        ));
        return;
    }
    let expected = if relaxation { entry.expect.as_ref() } else { entry.expect_light.as_ref() };
    let Some(expected) = expected else {
        return;
    };
    let verdicts = row.verdicts.as_ref().expect("analyzed rows carry verdicts");
    for goal in Goal::all() {
        let got = verdicts.get(goal.render()).map(String::as_str).unwrap_or("missing");
        let want = expected.get(goal);
        if got != want {
            row.mismatches
                .push(format!("{}: {} expected {want}, got {got}", row.name, goal.render()));
        }
    }
}

fn render(
    rows: &[Row],
    groups: &[GroupSummary],
    missing: &[String],
    relaxation: bool,
    has_manifest: bool,
) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "relaxation: {}", if relaxation { "on" } else { "off" });
    for summary in groups {
        let _ = writeln!(out);
        let _ = writeln!(out, "{}", summary.group);
        let width = rows
            .iter()
            .filter(|r| r.group == summary.group)
            .map(|r| r.name.len())
            .max()
            .unwrap_or(0);
        for row in rows.iter().filter(|r| r.group == summary.group) {
            let (mark, note) = if row.status == "rejected" {
                ("-", format!("out of scope: {}", row.rejection.as_deref().unwrap_or("")))
            } else if row.headline_certified {
                ("\u{2713}", row.headline_rule.clone().unwrap_or_default())
            } else {
                ("\u{2717}", "no certificate".to_string())
            };
            let _ = writeln!(out, "  {mark} {:<width$}  {note}", row.name);
            for mismatch in &row.mismatches {
                let _ = writeln!(out, "      MISMATCH {mismatch}");
            }
        }
        let _ = writeln!(
            out,
            "  certified {} of {}{}",
            summary.certified,
            summary.total,
            if summary.rejected > 0 {
                format!(" ({} out of scope)", summary.rejected)
            } else {
                String::new()
            }
        );
    }
    let _ = writeln!(out);
    for line in missing {
        let _ = writeln!(out, "MISMATCH {line}");
    }
    if has_manifest {
        let mismatches =
            rows.iter().map(|r| r.mismatches.len()).sum::<usize>() + missing.len();
        if mismatches == 0 {
            let _ = writeln!(out, "all verdicts match the expected manifest");
        } else {
            let _ = writeln!(out, "{mismatches} mismatches against the expected manifest");
        }
    }
    out
}
