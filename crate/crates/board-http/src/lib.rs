//! HTTP/1.1 front end for a bulletin board.
//!
//! | route                 | success                          | errors                    |
//! |-----------------------|----------------------------------|---------------------------|
//! | `POST /entries`       | 201 `{"seq","entry_hash"}`       | 400, 409, 422             |
//! | `GET /entries?from=k` | 200 `{"from","entries","next"}`  | 400                       |
//! | `GET /ballots/{hash}` | 200 `{"seq","kind"}`             | 400, 404 `{"status":"Absent"}` |
//! | `GET /snapshot`       | 200 `board.ndjson` bytes         |                           |
//!
//! `POST /entries` takes `{"kind": <entry kind>, "payload": <document>}`.
//! 400 means the request or payload does not parse, 409 that the board's
//! state forbids the entry (closed, duplicate ballot, wrong position) and
//! 422 that the payload parses but does not verify. Every error body is
//! `{"error": <reason>}`.
//!
//! Entries in `GET /entries` are the board lines embedded verbatim, so their
//! payload bytes are exactly those the entry hashes cover. Pages hold at
//! most [`PAGE_SIZE`] entries; `next` is the `from` of the following page or
//! `null` at the end.

use std::net::SocketAddr;
use std::sync::{Arc, RwLock};

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use e2ev_core::board::{Board, BoardError, Lookup};
use e2ev_core::GroupInt;
use e2ev_format::hexfmt::{decode_digest, encode};
use e2ev_format::EntryKind;
use serde::Deserialize;
use serde_json::json;
use serde_json::value::RawValue;

pub const PAGE_SIZE: usize = 100;

const NDJSON: &str = "application/x-ndjson";

type Shared<T> = Arc<RwLock<Board<T>>>;

pub fn router<T: GroupInt + Send + Sync + 'static>(board: Board<T>) -> Router {
    Router::new()
        .route("/entries", post(append::<T>).get(entries::<T>))
        .route("/ballots/{hash}", get(ballot::<T>))
        .route("/snapshot", get(snapshot::<T>))
        .with_state(Arc::new(RwLock::new(board)))
}

/// Serves `board` on `addr` until interrupted.
pub async fn serve<T: GroupInt + Send + Sync + 'static>(board: Board<T>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(board))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn error(status: StatusCode, reason: impl ToString) -> Response {
    (status, Json(json!({ "error": reason.to_string() }))).into_response()
}

fn status_of(e: &BoardError) -> StatusCode {
    match e {
        BoardError::Malformed { .. } => StatusCode::BAD_REQUEST,
        BoardError::Closed | BoardError::Duplicate(_) | BoardError::ManifestPosition | BoardError::AfterTally => {
            StatusCode::CONFLICT
        }
        BoardError::InvalidBallot(_) | BoardError::BadClose(_) => StatusCode::UNPROCESSABLE_ENTITY,
        BoardError::Corrupt(_) | BoardError::Manifest(_) | BoardError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AppendRequest {
    kind: String,
    payload: Box<RawValue>,
}

async fn append<T: GroupInt + Send + Sync>(State(board): State<Shared<T>>, body: String) -> Response {
    let req: AppendRequest = match serde_json::from_str(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, e),
    };
    let kind: EntryKind = match req.kind.parse() {
        Ok(k) => k,
        Err(e) => return error(StatusCode::BAD_REQUEST, e),
    };
    let result = board.write().expect("board lock").append(kind, req.payload.get());
    match result {
        Ok(a) => (
            StatusCode::CREATED,
            Json(json!({ "seq": a.seq, "entry_hash": encode(&a.entry_hash) })),
        )
            .into_response(),
        Err(e) => error(status_of(&e), e),
    }
}

#[derive(Deserialize)]
struct Page {
    #[serde(default)]
    from: usize,
}

async fn entries<T: GroupInt + Send + Sync>(
    State(board): State<Shared<T>>,
    page: Result<Query<Page>, axum::extract::rejection::QueryRejection>,
) -> Response {
    let Ok(Query(Page { from })) = page else {
        return error(StatusCode::BAD_REQUEST, "from must be a non-negative integer");
    };
    let board = board.read().expect("board lock");
    let all = board.snapshot().entries();
    let start = from.min(all.len());
    let end = (start + PAGE_SIZE).min(all.len());
    let lines: Vec<String> = all[start..end].iter().map(|e| e.line()).collect();
    let next = if end < all.len() {
        end.to_string()
    } else {
        "null".to_owned()
    };
    let body = format!("{{\"from\":{from},\"entries\":[{}],\"next\":{next}}}", lines.join(","));
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

async fn ballot<T: GroupInt + Send + Sync>(State(board): State<Shared<T>>, Path(hash): Path<String>) -> Response {
    let Ok(hash) = decode_digest(&hash) else {
        return error(
            StatusCode::BAD_REQUEST,
            "ballot hash must be 64 lowercase hex characters",
        );
    };
    match board.read().expect("board lock").lookup(&hash) {
        Lookup::Found { seq, kind } => Json(json!({ "seq": seq, "kind": kind.name() })).into_response(),
        Lookup::Absent => (StatusCode::NOT_FOUND, Json(json!({ "status": "Absent" }))).into_response(),
    }
}

async fn snapshot<T: GroupInt + Send + Sync>(State(board): State<Shared<T>>) -> Response {
    let body = board.read().expect("board lock").snapshot().to_ndjson();
    ([(header::CONTENT_TYPE, NDJSON)], body).into_response()
}
