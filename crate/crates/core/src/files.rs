//! On-disk document formats.
//!
//! Models, occupation measures, strategies, and simulation reports all use
//! one textual syntax (TOML) with strict per-kind schemas: unknown keys are
//! rejected, and nothing is defaulted except unlisted cost entries (0) and
//! unlisted transition mass (cemetery). Occupation, strategy, and report
//! documents carry a `kind` key so files cannot be confused for one another.
//!
//! Rendering is canonical — fixed key order following the model's own
//! state/action order, shortest round-trip float formatting — so identical
//! inputs always produce byte-identical documents.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use crate::error::{CmdpError, Result};
use crate::model::{
    validate_model, AnyStrategy, ConstrainedProblem, CostTable, DeterministicStrategy,
    FiniteMdpModel, MixedStrategy, ModelData, StationaryStrategy, TransitionRow,
};
use crate::occupancy::OccupationMeasure;
use crate::sim::SimulationReport;

// ---------------------------------------------------------------------------
// Model documents
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    states: Vec<String>,
    actions: ActionsDoc,
    initial: String,
    transitions: Vec<TransitionDoc>,
    costs: Vec<CostDoc>,
    objective: String,
    constraints: Vec<ConstraintDoc>,
}

/// The `actions` key accepts either one shared list for every state or a
/// per-state table.
#[derive(Deserialize)]
#[serde(untagged)]
enum ActionsDoc {
    Shared(Vec<String>),
    PerState(BTreeMap<String, Vec<String>>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionDoc {
    from: String,
    action: String,
    /// Target-state probabilities; unlisted mass goes to the cemetery.
    to: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CostDoc {
    name: String,
    /// Keyed `"state/action"`; unlisted pairs cost 0.
    entries: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintDoc {
    cost: String,
    bound: f64,
}

/// Parses and validates a model document.
pub fn parse_model_str(text: &str) -> Result<ConstrainedProblem> {
    let doc: ModelDoc = from_toml(text)?;
    let actions = match doc.actions {
        ActionsDoc::Shared(list) => vec![list; doc.states.len()],
        ActionsDoc::PerState(map) => {
            for key in map.keys() {
                if !doc.states.iter().any(|s| s == key) {
                    return Err(CmdpError::UnknownStateReference(key.clone()));
                }
            }
            doc.states
                .iter()
                .map(|s| {
                    map.get(s).cloned().ok_or_else(|| CmdpError::ParseError {
                        message: format!("state '{s}' has no action list"),
                        location: Some("actions".into()),
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let data = ModelData {
        states: doc.states,
        actions,
        initial: doc.initial,
        transitions: doc
            .transitions
            .into_iter()
            .map(|t| TransitionRow {
                from: t.from,
                action: t.action,
                to: t.to.into_iter().collect(),
            })
            .collect(),
        costs: doc
            .costs
            .into_iter()
            .map(|c| {
                let entries = c
                    .entries
                    .into_iter()
                    .map(|(key, value)| {
                        let (state, action) = split_pair_key(&key)?;
                        Ok((state, action, value))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(CostTable {
                    name: c.name,
                    entries,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        objective: doc.objective,
        constraints: doc.constraints.into_iter().map(|c| (c.cost, c.bound)).collect(),
    };
    validate_model(&data)
}

/// Reads and parses a model file.
pub fn parse_model(path: &Path) -> Result<ConstrainedProblem> {
    parse_model_str(&read_file(path)?)
}

// ---------------------------------------------------------------------------
// Occupation documents
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OccupationDoc {
    kind: String,
    /// Keyed `"state/action"`; unlisted pairs carry mass 0.
    entries: BTreeMap<String, f64>,
}

/// Parses an occupation-measure document against a model.
pub fn parse_occupation_str(text: &str, model: &FiniteMdpModel) -> Result<OccupationMeasure> {
    let doc: OccupationDoc = from_toml(text)?;
    expect_kind(&doc.kind, "occupation")?;
    let mut entries: Vec<Vec<f64>> = (0..model.num_states())
        .map(|x| vec![0.0; model.num_actions(x)])
        .collect();
    for (key, value) in doc.entries {
        let (state, action) = split_pair_key(&key)?;
        let (x, a) = resolve_pair(model, &state, &action)?;
        entries[x][a] = value;
    }
    OccupationMeasure::new(model, entries)
}

/// Reads and parses an occupation-measure file.
pub fn parse_occupation(path: &Path, model: &FiniteMdpModel) -> Result<OccupationMeasure> {
    parse_occupation_str(&read_file(path)?, model)
}

// ---------------------------------------------------------------------------
// Strategy documents
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeterministicDoc {
    /// One action name per state.
    choices: BTreeMap<String, String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StationaryDoc {
    /// One action distribution per state.
    rows: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MixedDoc {
    components: Vec<MixedComponentDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MixedComponentDoc {
    weight: f64,
    choices: BTreeMap<String, String>,
}

/// Parses a strategy document (deterministic, stationary, or mixed) against
/// a model.
pub fn parse_strategy_str(text: &str, model: &FiniteMdpModel) -> Result<AnyStrategy> {
    let mut table: toml::Table = text.parse().map_err(toml_error)?;
    let kind = match table.remove("kind") {
        Some(toml::Value::String(kind)) => kind,
        Some(_) => {
            return Err(CmdpError::ParseError {
                message: "'kind' must be a string".into(),
                location: Some("kind".into()),
            })
        }
        None => {
            return Err(CmdpError::ParseError {
                message: "missing 'kind' key".into(),
                location: None,
            })
        }
    };
    let rest = toml::Value::Table(table);
    match kind.as_str() {
        "deterministic" => {
            let doc: DeterministicDoc = rest.try_into().map_err(toml_error)?;
            Ok(choices_to_strategy(model, &doc.choices)?.into())
        }
        "stationary" => {
            let doc: StationaryDoc = rest.try_into().map_err(toml_error)?;
            let mut rows: Vec<Vec<f64>> = (0..model.num_states())
                .map(|x| vec![0.0; model.num_actions(x)])
                .collect();
            let mut seen = vec![false; model.num_states()];
            for (state, dist) in &doc.rows {
                let x = resolve_state(model, state)?;
                seen[x] = true;
                for (action, &p) in dist {
                    let a = resolve_action(model, x, action)?;
                    rows[x][a] = p;
                }
            }
            require_all_states(model, &seen, "rows")?;
            Ok(StationaryStrategy::new(model, rows)?.into())
        }
        "mixed" => {
            let doc: MixedDoc = rest.try_into().map_err(toml_error)?;
            let mut weights = Vec::with_capacity(doc.components.len());
            let mut components = Vec::with_capacity(doc.components.len());
            for comp in &doc.components {
                weights.push(comp.weight);
                components.push(choices_to_strategy(model, &comp.choices)?);
            }
            Ok(MixedStrategy::new(weights, components)?.into())
        }
        other => Err(CmdpError::ParseError {
            message: format!(
                "unknown strategy kind '{other}' (expected deterministic, stationary, or mixed)"
            ),
            location: Some("kind".into()),
        }),
    }
}

/// Reads and parses a strategy file.
pub fn parse_strategy(path: &Path, model: &FiniteMdpModel) -> Result<AnyStrategy> {
    parse_strategy_str(&read_file(path)?, model)
}

fn choices_to_strategy(
    model: &FiniteMdpModel,
    choices: &BTreeMap<String, String>,
) -> Result<DeterministicStrategy> {
    let mut picked = vec![usize::MAX; model.num_states()];
    let mut seen = vec![false; model.num_states()];
    for (state, action) in choices {
        let x = resolve_state(model, state)?;
        picked[x] = resolve_action(model, x, action)?;
        seen[x] = true;
    }
    require_all_states(model, &seen, "choices")?;
    DeterministicStrategy::new(model, picked)
}

fn require_all_states(model: &FiniteMdpModel, seen: &[bool], key: &str) -> Result<()> {
    for (x, &s) in seen.iter().enumerate() {
        if !s {
            return Err(CmdpError::ParseError {
                message: format!("state '{}' has no entry", model.state_name(x)),
                location: Some(key.into()),
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

/// Renders a problem back into model-document form (canonical key order).
pub fn render_model(problem: &ConstrainedProblem) -> String {
    let model = &problem.model;
    let mut out = String::new();
    let states = (0..model.num_states())
        .map(|x| toml_string(model.state_name(x)))
        .collect::<Vec<_>>()
        .join(", ");
    let _ = writeln!(out, "states = [{states}]");

    // Top-level keys must all precede the first table header; the
    // per-state [actions] table therefore comes after them.
    let shared = (1..model.num_states()).all(|x| {
        (0..model.num_actions(x)).map(|a| model.action_name(x, a)).collect::<Vec<_>>()
            == (0..model.num_actions(0)).map(|a| model.action_name(0, a)).collect::<Vec<_>>()
    });
    if shared {
        let actions = (0..model.num_actions(0))
            .map(|a| toml_string(model.action_name(0, a)))
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(out, "actions = [{actions}]");
    }
    let _ = writeln!(out, "initial = {}", toml_string(model.state_name(model.initial_state())));
    let _ = writeln!(out, "objective = {}", toml_string(model.cost_name(0)));
    if problem.bounds.is_empty() {
        let _ = writeln!(out, "constraints = []");
    }
    if !shared {
        let _ = writeln!(out, "\n[actions]");
        for x in 0..model.num_states() {
            let actions = (0..model.num_actions(x))
                .map(|a| toml_string(model.action_name(x, a)))
                .collect::<Vec<_>>()
                .join(", ");
            let _ = writeln!(out, "{} = [{actions}]", toml_key(model.state_name(x)));
        }
    }

    for x in 0..model.num_states() {
        for a in 0..model.num_actions(x) {
            let _ = writeln!(out, "\n[[transitions]]");
            let _ = writeln!(out, "from = {}", toml_string(model.state_name(x)));
            let _ = writeln!(out, "action = {}", toml_string(model.action_name(x, a)));
            let row = model.transition(x, a);
            let body = (0..model.num_states())
                .filter(|&y| row[y] > 0.0)
                .map(|y| format!("{} = {}", toml_key(model.state_name(y)), toml_float(row[y])))
                .collect::<Vec<_>>()
                .join(", ");
            if body.is_empty() {
                let _ = writeln!(out, "to = {{}}");
            } else {
                let _ = writeln!(out, "to = {{ {body} }}");
            }
        }
    }

    for j in 0..model.num_costs() {
        let _ = writeln!(out, "\n[[costs]]");
        let _ = writeln!(out, "name = {}", toml_string(model.cost_name(j)));
        let _ = writeln!(out, "\n[costs.entries]");
        for x in 0..model.num_states() {
            for a in 0..model.num_actions(x) {
                let value = model.cost(j, x, a);
                if value != 0.0 {
                    let _ = writeln!(
                        out,
                        "{} = {}",
                        pair_key(model.state_name(x), model.action_name(x, a)),
                        toml_float(value)
                    );
                }
            }
        }
    }

    for (j, &bound) in problem.bounds.iter().enumerate() {
        let _ = writeln!(out, "\n[[constraints]]");
        let _ = writeln!(out, "cost = {}", toml_string(model.cost_name(j + 1)));
        let _ = writeln!(out, "bound = {}", toml_float(bound));
    }
    out
}

/// Renders an occupation measure (entries in model order, zeros omitted).
pub fn render_occupation(model: &FiniteMdpModel, m: &OccupationMeasure) -> String {
    let mut out = String::from("kind = \"occupation\"\n\n[entries]\n");
    for x in 0..model.num_states() {
        for a in 0..model.num_actions(x) {
            let value = m.get(x, a);
            if value != 0.0 {
                let _ = writeln!(
                    out,
                    "{} = {}",
                    pair_key(model.state_name(x), model.action_name(x, a)),
                    toml_float(value)
                );
            }
        }
    }
    out
}

/// Renders a strategy document. Markov strategies have no file form.
pub fn render_strategy(model: &FiniteMdpModel, strategy: &AnyStrategy) -> Result<String> {
    let mut out = String::new();
    match strategy {
        AnyStrategy::Deterministic(phi) => {
            out.push_str("kind = \"deterministic\"\n\n[choices]\n");
            render_choices(&mut out, model, phi);
        }
        AnyStrategy::Stationary(sigma) => {
            out.push_str("kind = \"stationary\"\n");
            for x in 0..model.num_states() {
                let _ = writeln!(out, "\n[rows.{}]", toml_key(model.state_name(x)));
                for a in sigma.support(x) {
                    let _ = writeln!(
                        out,
                        "{} = {}",
                        toml_key(model.action_name(x, a)),
                        toml_float(sigma.row(x)[a])
                    );
                }
            }
        }
        AnyStrategy::Mixed(mix) => {
            out.push_str("kind = \"mixed\"\n");
            for (weight, phi) in mix.iter() {
                let _ = writeln!(out, "\n[[components]]");
                let _ = writeln!(out, "weight = {}", toml_float(weight));
                let _ = writeln!(out, "\n[components.choices]");
                render_choices(&mut out, model, phi);
            }
        }
        AnyStrategy::Markov(_) => {
            return Err(CmdpError::InvalidArgument(
                "markov strategies have no document form".into(),
            ))
        }
    }
    Ok(out)
}

fn render_choices(out: &mut String, model: &FiniteMdpModel, phi: &DeterministicStrategy) {
    for x in 0..model.num_states() {
        let _ = writeln!(
            out,
            "{} = {}",
            toml_key(model.state_name(x)),
            toml_string(model.action_name(x, phi.action(x)))
        );
    }
}

/// Renders a simulation report: the occupation table plus a statistics
/// block (standard errors, cost estimates, absorption histogram).
pub fn render_report(model: &FiniteMdpModel, report: &SimulationReport) -> String {
    let mut out = String::from("kind = \"report\"\n");
    let _ = writeln!(out, "n = {}", report.n);
    let _ = writeln!(out, "seed = {}", report.seed);
    let _ = writeln!(out, "step_cap = {}", report.step_cap);
    let _ = writeln!(out, "capped = {}", report.capped);

    out.push_str("\n[entries]\n");
    for x in 0..model.num_states() {
        for a in 0..model.num_actions(x) {
            let value = report.occupation_mean[x][a];
            if value != 0.0 {
                let _ = writeln!(
                    out,
                    "{} = {}",
                    pair_key(model.state_name(x), model.action_name(x, a)),
                    toml_float(value)
                );
            }
        }
    }
    out.push_str("\n[standard_errors]\n");
    for x in 0..model.num_states() {
        for a in 0..model.num_actions(x) {
            let value = report.occupation_se[x][a];
            if value != 0.0 {
                let _ = writeln!(
                    out,
                    "{} = {}",
                    pair_key(model.state_name(x), model.action_name(x, a)),
                    toml_float(value)
                );
            }
        }
    }
    out.push_str("\n[cost_means]\n");
    for (j, &value) in report.cost_mean.iter().enumerate() {
        let _ = writeln!(out, "{} = {}", toml_key(model.cost_name(j)), toml_float(value));
    }
    out.push_str("\n[cost_standard_errors]\n");
    for (j, &value) in report.cost_se.iter().enumerate() {
        let _ = writeln!(out, "{} = {}", toml_key(model.cost_name(j)), toml_float(value));
    }
    out.push_str("\n[absorption_histogram]\n");
    for (&steps, &count) in &report.absorption_histogram {
        let _ = writeln!(out, "{steps} = {count}");
    }
    out
}

/// Parsed form of a report document; used for round-trip checks and by the
/// comparison path of the simulate command.
#[derive(Deserialize, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ReportDoc {
    pub kind: String,
    pub n: u64,
    pub seed: u64,
    pub step_cap: u64,
    pub capped: u64,
    pub entries: BTreeMap<String, f64>,
    pub standard_errors: BTreeMap<String, f64>,
    pub cost_means: BTreeMap<String, f64>,
    pub cost_standard_errors: BTreeMap<String, f64>,
    pub absorption_histogram: BTreeMap<String, u64>,
}

/// Parses a report document.
pub fn parse_report_str(text: &str) -> Result<ReportDoc> {
    let doc: ReportDoc = from_toml(text)?;
    expect_kind(&doc.kind, "report")?;
    Ok(doc)
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

/// Reads a file into a string, attaching the path to I/O failures.
pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CmdpError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes a file, attaching the path to I/O failures.
pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CmdpError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn from_toml<'de, T: Deserialize<'de>>(text: &'de str) -> Result<T> {
    toml::from_str(text).map_err(toml_error)
}

fn toml_error(err: toml::de::Error) -> CmdpError {
    CmdpError::ParseError {
        message: err.message().to_string(),
        location: err.span().map(|span| format!("offset {}..{}", span.start, span.end)),
    }
}

fn expect_kind(found: &str, expected: &str) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(CmdpError::ParseError {
            message: format!("expected kind \"{expected}\", found \"{found}\""),
            location: Some("kind".into()),
        })
    }
}

/// Splits a `"state/action"` key at its first slash (names cannot contain
/// one).
fn split_pair_key(key: &str) -> Result<(String, String)> {
    match key.split_once('/') {
        Some((state, action)) if !state.is_empty() && !action.is_empty() => {
            Ok((state.to_string(), action.to_string()))
        }
        _ => Err(CmdpError::ParseError {
            message: format!("key '{key}' is not of the form 'state/action'"),
            location: None,
        }),
    }
}

fn resolve_state(model: &FiniteMdpModel, state: &str) -> Result<usize> {
    model
        .state_index(state)
        .ok_or_else(|| CmdpError::UnknownStateReference(state.to_string()))
}

fn resolve_action(model: &FiniteMdpModel, x: usize, action: &str) -> Result<usize> {
    model
        .action_index(x, action)
        .ok_or_else(|| CmdpError::UnknownActionReference {
            state: model.state_name(x).to_string(),
            action: action.to_string(),
        })
}

fn resolve_pair(model: &FiniteMdpModel, state: &str, action: &str) -> Result<(usize, usize)> {
    let x = resolve_state(model, state)?;
    Ok((x, resolve_action(model, x, action)?))
}

/// Formats a pair key `"state/action"`, always quoted (the slash forces it).
fn pair_key(state: &str, action: &str) -> String {
    toml_string(&format!("{state}/{action}"))
}

/// Quotes a string as a TOML basic string.
fn toml_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Emits a bare key when possible, a quoted one otherwise.
fn toml_key(s: &str) -> String {
    let bare = !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if bare {
        s.to_string()
    } else {
        toml_string(s)
    }
}

/// Shortest round-trip float syntax that TOML still reads as a float.
/// Extreme magnitudes switch to exponent form to stay readable.
fn toml_float(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e16).contains(&a) {
        return format!("{v:e}");
    }
    let s = format!("{v}");
    if s.contains('.') || s.contains('e') || s.contains('E') {
        s
    } else {
        format!("{s}.0")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures;
    use crate::occupancy::occupation_of_stationary;
    use crate::sim::simulate;

    const TWOACT_DOC: &str = r#"
states = ["s0"]
actions = ["a", "b"]
initial = "s0"
objective = "loss"

[[transitions]]
from = "s0"
action = "a"
to = {}

[[transitions]]
from = "s0"
action = "b"
to = {}

[[costs]]
name = "loss"
entries = { "s0/a" = 1.0 }

[[costs]]
name = "gain"
entries = { "s0/b" = 1.0 }

[[constraints]]
cost = "gain"
bound = 0.5
"#;

    #[test]
    fn parses_a_model_document() {
        let p = parse_model_str(TWOACT_DOC).unwrap();
        assert_eq!(p.model.num_states(), 1);
        assert_eq!(p.model.num_actions(0), 2);
        assert_eq!(p.bounds, vec![0.5]);
        assert_eq!(p.model.cost(0, 0, 0), 1.0);
        assert_eq!(p.model.cost(1, 0, 1), 1.0);
        assert_eq!(p.model.absorb(0, 0), 1.0);
    }

    #[test]
    fn per_state_action_lists_work() {
        let text = r#"
states = ["s0", "s1"]
initial = "s0"
objective = "loss"
constraints = []

[actions]
s0 = ["go"]
s1 = ["stop", "wait"]

[[transitions]]
from = "s0"
action = "go"
to = { s1 = 1.0 }

[[transitions]]
from = "s1"
action = "wait"
to = { s1 = 0.5 }

[[costs]]
name = "loss"
entries = { "s1/wait" = 2.0 }
"#;
        let p = parse_model_str(text).unwrap();
        assert_eq!(p.model.num_actions(0), 1);
        assert_eq!(p.model.num_actions(1), 2);
        assert_eq!(p.model.cost(0, 1, 1), 2.0);
        // The unlisted row (s1, stop) sends all mass to the cemetery.
        assert_eq!(p.model.absorb(1, 0), 1.0);
    }

    #[test]
    fn parse_errors_carry_context() {
        // Missing objective key.
        let text = "states = [\"s0\"]\nactions = [\"a\"]\ninitial = \"s0\"\ntransitions = []\ncosts = []\nconstraints = []\n";
        match parse_model_str(text) {
            Err(CmdpError::ParseError { message, .. }) => {
                assert!(message.contains("objective"), "{message}")
            }
            other => panic!("expected ParseError, got {other:?}"),
        }
        // Unknown key.
        let with_extra = TWOACT_DOC.replace("initial = \"s0\"", "initial = \"s0\"\nbogus = 1");
        assert!(matches!(
            parse_model_str(&with_extra),
            Err(CmdpError::ParseError { .. })
        ));
        // Malformed pair key.
        let bad_key = TWOACT_DOC.replace("\"s0/a\"", "\"s0-a\"");
        assert!(matches!(
            parse_model_str(&bad_key),
            Err(CmdpError::ParseError { .. })
        ));
        // Unknown state in a transition.
        let bad_state = TWOACT_DOC.replace("to = {}", "to = { zz = 0.5 }");
        assert!(matches!(
            parse_model_str(&bad_state),
            Err(CmdpError::UnknownStateReference(s)) if s == "zz"
        ));
    }

    #[test]
    fn model_rendering_round_trips() {
        for p in [
            fixtures::twoact(0.5),
            fixtures::chain2(),
            fixtures::geometric(0.5),
            fixtures::stopping(0.5),
        ] {
            let text = render_model(&p);
            let back = parse_model_str(&text).unwrap();
            assert_eq!(back.model, p.model, "{text}");
            assert_eq!(back.bounds, p.bounds);
            // Canonical form is a fixed point of parse ∘ render.
            assert_eq!(render_model(&back), text);
        }
    }

    #[test]
    fn occupation_documents_round_trip() {
        let p = fixtures::chain2();
        let sigma = StationaryStrategy::new(&p.model, vec![vec![1.0], vec![1.0]]).unwrap();
        let m = occupation_of_stationary(&p.model, &sigma).unwrap();
        let text = render_occupation(&p.model, &m);
        let back = parse_occupation_str(&text, &p.model).unwrap();
        assert_eq!(m.sup_distance(&back), 0.0);
        assert_eq!(render_occupation(&p.model, &back), text);
        // Wrong kind is rejected.
        assert!(matches!(
            parse_occupation_str(&text.replace("occupation", "report"), &p.model),
            Err(CmdpError::ParseError { .. })
        ));
    }

    #[test]
    fn strategy_documents_round_trip_all_kinds() {
        let p = fixtures::twoact(0.5);
        let phi_a = DeterministicStrategy::new(&p.model, vec![0]).unwrap();
        let phi_b = DeterministicStrategy::new(&p.model, vec![1]).unwrap();
        let strategies: Vec<AnyStrategy> = vec![
            phi_a.clone().into(),
            StationaryStrategy::new(&p.model, vec![vec![0.25, 0.75]]).unwrap().into(),
            MixedStrategy::new(vec![0.5, 0.5], vec![phi_a, phi_b]).unwrap().into(),
        ];
        for s in strategies {
            let text = render_strategy(&p.model, &s).unwrap();
            let back = parse_strategy_str(&text, &p.model).unwrap();
            assert_eq!(back, s, "{text}");
            assert_eq!(render_strategy(&p.model, &back).unwrap(), text);
        }
    }

    #[test]
    fn strategy_documents_are_strict() {
        let p = fixtures::chain2();
        // Missing state entry.
        let text = "kind = \"deterministic\"\n[choices]\ns0 = \"m\"\n";
        assert!(matches!(
            parse_strategy_str(text, &p.model),
            Err(CmdpError::ParseError { .. })
        ));
        // Unknown action.
        let text = "kind = \"deterministic\"\n[choices]\ns0 = \"m\"\ns1 = \"zz\"\n";
        assert!(matches!(
            parse_strategy_str(text, &p.model),
            Err(CmdpError::UnknownActionReference { .. })
        ));
        // Unknown kind.
        let text = "kind = \"markov\"\n";
        assert!(matches!(
            parse_strategy_str(text, &p.model),
            Err(CmdpError::ParseError { .. })
        ));
    }

    #[test]
    fn report_documents_round_trip() {
        let p = fixtures::geometric(0.5);
        let sigma: AnyStrategy =
            StationaryStrategy::new(&p.model, vec![vec![1.0]]).unwrap().into();
        let report = simulate(&p.model, &sigma, 500, 3, 1000);
        let text = render_report(&p.model, &report);
        let doc = parse_report_str(&text).unwrap();
        assert_eq!(doc.n, 500);
        assert_eq!(doc.capped, 0);
        assert_eq!(
            doc.entries.get("s0/a").copied().unwrap(),
            report.occupation_mean[0][0]
        );
        let total: u64 = doc.absorption_histogram.values().sum();
        assert_eq!(total, 500);
    }

    #[test]
    fn float_syntax_is_always_toml_float() {
        assert_eq!(toml_float(0.5), "0.5");
        assert_eq!(toml_float(2.0), "2.0");
        assert_eq!(toml_float(1e-9), "1e-9");
        assert_eq!(toml_float(1e300), "1e300");
    }
}

