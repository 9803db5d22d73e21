//! JSON trace format:
//!
//! ```json
//! { "name": "...", "workflows": [ { "id": 1, "submit_time_s": 0.0, "chained_after": null,
//!   "tasks": [ { "id": 1, "runtime_s": 60.0, "cpus": 1, "parents": [] } ] } ] }
//! ```

use serde::{Deserialize, Serialize};

use super::{Task, Workflow, WorkloadTrace};
use crate::error::{Error, Result};
use crate::time::SimTime;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceDoc {
    name: String,
    workflows: Vec<WorkflowDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkflowDoc {
    id: u64,
    submit_time_s: f64,
    #[serde(default)]
    chained_after: Option<u64>,
    tasks: Vec<TaskDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskDoc {
    id: u64,
    runtime_s: f64,
    cpus: u32,
    #[serde(default)]
    parents: Vec<u64>,
}

pub fn parse_trace(document: &str) -> Result<WorkloadTrace> {
    let doc: TraceDoc = serde_json::from_str(document)?;
    let mut workflows = Vec::with_capacity(doc.workflows.len());
    for wf in doc.workflows {
        let submit_time = SimTime::from_secs_f64(wf.submit_time_s).ok_or_else(|| {
            Error::InvalidTrace(format!(
                "workflow {} has invalid submit time {}",
                wf.id, wf.submit_time_s
            ))
        })?;
        let mut tasks = Vec::with_capacity(wf.tasks.len());
        for t in wf.tasks {
            let runtime = SimTime::from_secs_f64(t.runtime_s)
                .filter(|r| *r > SimTime::ZERO)
                .ok_or_else(|| Error::InvalidTask {
                    workflow: wf.id,
                    task: t.id,
                    reason: format!("runtime {} s is not positive", t.runtime_s),
                })?;
            tasks.push(Task {
                id: t.id,
                workflow_id: wf.id,
                runtime,
                cpus: t.cpus,
                parents: t.parents,
            });
        }
        workflows.push(Workflow {
            id: wf.id,
            submit_time,
            tasks,
            chained_after: wf.chained_after,
        });
    }
    WorkloadTrace::new(doc.name, workflows)
}

pub fn to_json(trace: &WorkloadTrace) -> String {
    let doc = TraceDoc {
        name: trace.name().to_string(),
        workflows: trace
            .workflows()
            .iter()
            .map(|wf| WorkflowDoc {
                id: wf.id,
                submit_time_s: wf.submit_time.as_secs_f64(),
                chained_after: wf.chained_after,
                tasks: wf
                    .tasks
                    .iter()
                    .map(|t| TaskDoc {
                        id: t.id,
                        runtime_s: t.runtime.as_secs_f64(),
                        cpus: t.cpus,
                        parents: t.parents.clone(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string(&doc).expect("trace serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let doc = r#"{"name":"one","workflows":[{"id":1,"submit_time_s":0,"chained_after":null,
            "tasks":[{"id":1,"runtime_s":10,"cpus":1,"parents":[]}]}]}"#;
        let trace = parse_trace(doc).unwrap();
        assert_eq!((trace.workflow_count(), trace.task_count()), (1, 1));
        assert_eq!(trace.name(), "one");
    }

    #[test]
    fn mutual_parents_are_a_cycle() {
        let doc = r#"{"name":"c","workflows":[{"id":7,"submit_time_s":0,"chained_after":null,"tasks":[
            {"id":1,"runtime_s":1,"cpus":1,"parents":[2]},
            {"id":2,"runtime_s":1,"cpus":1,"parents":[1]}]}]}"#;
        assert_eq!(parse_trace(doc).unwrap_err().to_string(), "cyclic workflow 7");
    }

    #[test]
    fn non_positive_runtime_is_invalid() {
        for rt in ["0", "-3", "0.0001"] {
            let doc = format!(
                r#"{{"name":"c","workflows":[{{"id":1,"submit_time_s":0,"tasks":[
                {{"id":1,"runtime_s":{rt},"cpus":1,"parents":[]}}]}}]}}"#
            );
            let err = parse_trace(&doc).unwrap_err();
            assert!(err.to_string().starts_with("invalid task"), "{err}");
        }
    }

    #[test]
    fn malformed_json_is_reported() {
        assert!(matches!(parse_trace("{"), Err(Error::Json(_))));
        assert!(matches!(parse_trace(r#"{"name":"x"}"#), Err(Error::Json(_))));
    }

    #[test]
    fn serialize_then_parse_is_identity() {
        let doc = r#"{"name":"d","workflows":[{"id":3,"submit_time_s":1.5,"chained_after":null,"tasks":[
            {"id":1,"runtime_s":2.25,"cpus":2,"parents":[]},
            {"id":2,"runtime_s":1,"cpus":1,"parents":[1]}]},
            {"id":4,"submit_time_s":2,"chained_after":3,"tasks":[{"id":9,"runtime_s":3,"cpus":1}]}]}"#;
        let trace = parse_trace(doc).unwrap();
        assert_eq!(parse_trace(&to_json(&trace)).unwrap(), trace);
    }
}
