use std::sync::Arc;

use aiaudit_core::catalog::{load_catalog, validate as validate_catalog};
use aiaudit_core::engine::{format_digest, verify_record, GameRecord, ReplayError};
use aiaudit_core::sim::{self, emit_report, ReportFormat, SimPlan};
use aiaudit_core::Catalog;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Deserialize;
use serde_json::json;

use crate::hub::Hub;

fn failure(status: StatusCode, code: &str, text: impl ToString) -> Response {
    (status, Json(json!({ "code": code, "text": text.to_string() }))).into_response()
}

fn pick_catalog(hub: &Hub, name: Option<&str>) -> Result<Arc<Catalog>, Response> {
    let name = name.unwrap_or("default");
    hub.catalog(name)
        .ok_or_else(|| failure(StatusCode::NOT_FOUND, "unknown-catalog", format!("no catalog named {name:?}")))
}

pub(crate) async fn health(State(hub): State<Arc<Hub>>) -> Json<serde_json::Value> {
    Json(json!({ "status": "ok", "sessions": hub.session_count() }))
}

#[derive(Deserialize)]
pub(crate) struct CatalogQuery {
    name: Option<String>,
}

pub(crate) async fn catalog(State(hub): State<Arc<Hub>>, Query(q): Query<CatalogQuery>) -> Response {
    match pick_catalog(&hub, q.name.as_deref()) {
        Ok(c) => Json(c.as_ref().clone()).into_response(),
        Err(r) => r,
    }
}

/// Body: catalog TOML. Answers with the validation report.
pub(crate) async fn validate(body: String) -> Response {
    match load_catalog(&body) {
        Ok(catalog) => Json(validate_catalog(&catalog)).into_response(),
        Err(e) => failure(StatusCode::UNPROCESSABLE_ENTITY, "catalog-parse", e),
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum FormatName {
    Json,
    Csv,
}

#[derive(Deserialize)]
pub(crate) struct SimulateRequest {
    plan: SimPlan,
    #[serde(default)]
    format: Option<FormatName>,
    #[serde(default)]
    catalog: Option<String>,
}

async fn blocking<T: Send + 'static>(work: impl FnOnce() -> T + Send + 'static) -> Result<T, Response> {
    tokio::task::spawn_blocking(work)
        .await
        .map_err(|e| failure(StatusCode::INTERNAL_SERVER_ERROR, "internal", e))
}

pub(crate) async fn simulate(State(hub): State<Arc<Hub>>, Json(req): Json<SimulateRequest>) -> Response {
    let catalog = match pick_catalog(&hub, req.catalog.as_deref()) {
        Ok(c) => c,
        Err(r) => return r,
    };
    let format = match req.format {
        Some(FormatName::Csv) => ReportFormat::Csv,
        _ => ReportFormat::Json,
    };
    let plan = req.plan;
    match blocking(move || sim::run(&plan, catalog)).await {
        Ok(Ok(report)) => {
            let content_type = match format {
                ReportFormat::Csv => "text/csv",
                ReportFormat::Json => "application/json",
            };
            ([(header::CONTENT_TYPE, content_type)], emit_report(&report, format)).into_response()
        }
        Ok(Err(e)) => failure(StatusCode::UNPROCESSABLE_ENTITY, "simulation", e),
        Err(r) => r,
    }
}

#[derive(Deserialize)]
pub(crate) struct CompareRequest {
    plan_a: SimPlan,
    plan_b: SimPlan,
    #[serde(default)]
    catalog: Option<String>,
}

pub(crate) async fn compare(State(hub): State<Arc<Hub>>, Json(req): Json<CompareRequest>) -> Response {
    let catalog = match pick_catalog(&hub, req.catalog.as_deref()) {
        Ok(c) => c,
        Err(r) => return r,
    };
    match blocking(move || sim::compare(&req.plan_a, &req.plan_b, catalog)).await {
        Ok(Ok(paired)) => ([(header::CONTENT_TYPE, "application/json")], paired.to_json()).into_response(),
        Ok(Err(e @ sim::SimError::MismatchedPlans(_))) => failure(StatusCode::UNPROCESSABLE_ENTITY, "mismatched-plans", e),
        Ok(Err(e)) => failure(StatusCode::UNPROCESSABLE_ENTITY, "simulation", e),
        Err(r) => r,
    }
}

#[derive(Deserialize)]
pub(crate) struct ReplayRequest {
    record: GameRecord,
    #[serde(default)]
    catalog: Option<String>,
}

pub(crate) async fn replay(State(hub): State<Arc<Hub>>, Json(req): Json<ReplayRequest>) -> Response {
    let catalog = match pick_catalog(&hub, req.catalog.as_deref()) {
        Ok(c) => c,
        Err(r) => return r,
    };
    match blocking(move || verify_record(&req.record, catalog).map(|s| format_digest(s.digest()))).await {
        Ok(Ok(digest)) => Json(json!({ "verified": true, "digest": digest })).into_response(),
        Ok(Err(e)) => {
            let code = match e {
                ReplayError::DigestMismatch { .. } => "digest-mismatch",
                ReplayError::Divergence { .. } => "replay-divergence",
                ReplayError::Setup(_) => "invalid-config",
                ReplayError::Format(_) => "bad-record",
            };
            failure(StatusCode::UNPROCESSABLE_ENTITY, code, e)
        }
        Err(r) => r,
    }
}
