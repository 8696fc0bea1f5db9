//! In-process HTTP stub speaking the inference wire protocol.
//!
//! Mask scoring answers with the JSON array that follows `issue: ` in the
//! prompt; generation echoes the prompt. Prompts starting with
//! `MALFORMED:<kind>` get a broken reply instead.

use std::thread;

use rationale_miner::backends::wire::{GenerateRequest, MaskProbsRequest};
use tiny_http::{Header, Response, Server};

pub struct Stub {
    pub base_url: String,
}

fn malformed(kind: &str) -> (u16, String) {
    match kind {
        "short" => (200, r#"{"probs":[0.1,0.2]}"#.into()),
        "range" => (200, format!(r#"{{"probs":[{}]}}"#, ["1.5"; 14].join(","))),
        "missing" => (200, r#"{"p":[]}"#.into()),
        "notjson" => (200, "<html>oops</html>".into()),
        "textnum" => (200, r#"{"text":5}"#.into()),
        "empty" => (200, String::new()),
        "status" => (500, r#"{"error":"boom"}"#.into()),
        other => (200, format!(r#"{{"unexpected":"{other}"}}"#)),
    }
}

fn reply(url: &str, body: &str, auth: Option<String>) -> (u16, String) {
    if url == "/v1/mask-probs" {
        let Ok(req) = serde_json::from_str::<MaskProbsRequest>(body) else { return (400, "bad request".into()) };
        if let Some(kind) = req.prompt.strip_prefix("MALFORMED:") {
            return malformed(kind.split_whitespace().next().unwrap_or(""));
        }
        if req.prompt.starts_with("AUTH:") && auth.as_deref() != Some("Bearer sekrit") {
            return (401, "unauthorized".into());
        }
        let probs = req.prompt.rsplit_once("issue: ").map_or("[]", |(_, p)| p);
        (200, format!(r#"{{"probs":{probs}}}"#))
    } else if url == "/v1/generate" {
        let Ok(req) = serde_json::from_str::<GenerateRequest>(body) else { return (400, "bad request".into()) };
        if let Some(kind) = req.prompt.strip_prefix("MALFORMED:") {
            return malformed(kind.split_whitespace().next().unwrap_or(""));
        }
        (200, serde_json::json!({ "text": req.prompt }).to_string())
    } else {
        (404, "not found".into())
    }
}

pub fn start() -> Stub {
    let server = Server::http("127.0.0.1:0").expect("bind stub server");
    let base_url = format!("http://{}", server.server_addr().to_ip().expect("ip listener"));
    thread::spawn(move || {
        for mut request in server.incoming_requests() {
            let mut body = String::new();
            let _ = request.as_reader().read_to_string(&mut body);
            let auth = request
                .headers()
                .iter()
                .find(|h| h.field.equiv("Authorization"))
                .map(|h| h.value.as_str().to_owned());
            let (status, text) = reply(request.url(), &body, auth);
            let response = Response::from_string(text)
                .with_status_code(status)
                .with_header(Header::from_bytes("Content-Type", "application/json").unwrap());
            let _ = request.respond(response);
        }
    });
    Stub { base_url }
}
