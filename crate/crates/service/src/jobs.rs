//! In-memory job store for long simulations, with optional one-file-per-job
//! persistence of results.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use sam_prior::{Engine, VERSION};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobKind {
    Calibrate,
    Simulate,
    Curve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub id: String,
    pub kind: JobKind,
    pub status: JobStatus,
    pub progress: f64,
    pub result_ref: String,
    /// Milliseconds since the Unix epoch.
    pub submitted_at: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub seed: u64,
    pub replicates: u64,
    pub software_version: String,
}

/// Why a result could not be returned.
#[derive(Debug, Clone, PartialEq)]
pub enum ResultError {
    Unknown,
    NotReady(JobStatus),
    Failed(String),
}

struct Entry {
    record: JobRecord,
    ticks: Arc<AtomicU64>,
    total: u64,
    result: Option<Arc<String>>,
}

pub fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

#[derive(Default)]
pub struct JobStore {
    jobs: Mutex<HashMap<Uuid, Entry>>,
    results_dir: Option<PathBuf>,
}

impl JobStore {
    pub fn new(results_dir: Option<PathBuf>) -> Self {
        Self {
            jobs: Mutex::new(HashMap::new()),
            results_dir,
        }
    }

    /// Registers a job and runs `work` on the blocking pool. `total` is the
    /// number of progress ticks the work is expected to emit.
    pub fn submit<F>(self: &Arc<Self>, kind: JobKind, seed: u64, replicates: u64, total: u64, engine: &Engine, work: F) -> JobRecord
    where
        F: FnOnce(&Engine) -> sam_prior::Result<String> + Send + 'static,
    {
        let id = Uuid::new_v4();
        let ticks = Arc::new(AtomicU64::new(0));
        let record = JobRecord {
            id: id.to_string(),
            kind,
            status: JobStatus::Queued,
            progress: 0.0,
            result_ref: format!("/v1/jobs/{id}/result"),
            submitted_at: now_ms(),
            finished_at: None,
            error: None,
            seed,
            replicates,
            software_version: VERSION.to_string(),
        };
        self.jobs.lock().unwrap().insert(
            id,
            Entry {
                record: record.clone(),
                ticks: ticks.clone(),
                total: total.max(1),
                result: None,
            },
        );
        let counter = ticks.clone();
        let engine = engine.clone().with_progress(move || {
            counter.fetch_add(1, Ordering::Relaxed);
        });
        let store = self.clone();
        tokio::task::spawn_blocking(move || {
            store.set_status(id, JobStatus::Running);
            tracing::info!(%id, ?kind, "job started");
            let outcome = work(&engine);
            store.finish(id, outcome);
        });
        record
    }

    fn set_status(&self, id: Uuid, status: JobStatus) {
        if let Some(e) = self.jobs.lock().unwrap().get_mut(&id) {
            e.record.status = status;
        }
    }

    fn finish(&self, id: Uuid, outcome: sam_prior::Result<String>) {
        let persisted = match (&outcome, &self.results_dir) {
            (Ok(body), Some(dir)) => {
                let path = dir.join(format!("{id}.json"));
                std::fs::write(&path, body).map_err(|e| format!("cannot persist result to {}: {e}", path.display()))
            }
            _ => Ok(()),
        };
        let mut jobs = self.jobs.lock().unwrap();
        let Some(e) = jobs.get_mut(&id) else { return };
        e.record.finished_at = Some(now_ms());
        match (outcome, persisted) {
            (Ok(body), Ok(())) => {
                e.record.status = JobStatus::Done;
                e.record.progress = 1.0;
                e.result = Some(Arc::new(body));
                tracing::info!(%id, "job done");
            }
            (Err(err), _) => {
                e.record.status = JobStatus::Failed;
                e.record.error = Some(err.to_string());
                tracing::warn!(%id, %err, "job failed");
            }
            (Ok(_), Err(msg)) => {
                e.record.status = JobStatus::Failed;
                e.record.error = Some(msg);
            }
        }
    }

    /// Current record. Progress never decreases and stays below 1 until the
    /// job is done.
    pub fn get(&self, id: &str) -> Option<JobRecord> {
        let id = Uuid::parse_str(id).ok()?;
        let mut jobs = self.jobs.lock().unwrap();
        let e = jobs.get_mut(&id)?;
        if e.record.status == JobStatus::Running || e.record.status == JobStatus::Queued {
            let fraction = e.ticks.load(Ordering::Relaxed) as f64 / e.total as f64;
            e.record.progress = e.record.progress.max(fraction.min(0.999));
        }
        Some(e.record.clone())
    }

    pub fn result(&self, id: &str) -> Result<Arc<String>, ResultError> {
        let record = self.get(id).ok_or(ResultError::Unknown)?;
        match record.status {
            JobStatus::Done => {}
            JobStatus::Failed => return Err(ResultError::Failed(record.error.unwrap_or_default())),
            s => return Err(ResultError::NotReady(s)),
        }
        let id = Uuid::parse_str(id).map_err(|_| ResultError::Unknown)?;
        let jobs = self.jobs.lock().unwrap();
        jobs.get(&id).and_then(|e| e.result.clone()).ok_or(ResultError::Unknown)
    }
}
