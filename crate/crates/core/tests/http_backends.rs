//! HTTP backends against a scripted local server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex, Once};
use std::thread;

use agora_core::gateways::config::{ApiFlavor, BackendConfig};
use agora_core::gateways::http::{HttpChat, HttpImages};
use agora_core::gateways::mock::MockImages;
use agora_core::gateways::{ChatBackend, ImageBackend, ImageRequest, LlmRequest};
use agora_core::wiki::{HttpWiki, WikiBackend};
use base64::Engine;
use serde_json::{json, Value};

#[derive(Debug, Clone)]
struct Seen {
    request_line: String,
    authorization: Option<String>,
    body: String,
}

/// Serves one scripted response per connection, in order, then stops.
fn stub(script: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<Seen>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    thread::spawn(move || {
        for (status, body) in script {
            let Ok((stream, _)) = listener.accept() else { return };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            let mut len = 0;
            let mut authorization = None;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                let (name, value) = line.split_once(':').unwrap();
                match name.to_ascii_lowercase().as_str() {
                    "content-length" => len = value.trim().parse().unwrap(),
                    "authorization" => authorization = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            log.lock().unwrap().push(Seen {
                request_line: request_line.trim_end().to_string(),
                authorization,
                body: String::from_utf8(buf).unwrap(),
            });
            let mut stream = stream;
            let reply = format!(
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(reply.as_bytes()).unwrap();
        }
    });
    (format!("http://{addr}"), seen)
}

struct Capture(Mutex<Vec<String>>);

impl log::Log for Capture {
    fn enabled(&self, _: &log::Metadata) -> bool {
        true
    }
    fn log(&self, record: &log::Record) {
        self.0.lock().unwrap().push(record.args().to_string());
    }
    fn flush(&self) {}
}

static LOGS: Capture = Capture(Mutex::new(Vec::new()));

fn capture_logs() {
    static INIT: Once = Once::new();
    INIT.call_once(|| {
        log::set_logger(&LOGS).unwrap();
        log::set_max_level(log::LevelFilter::Trace);
    });
}

fn logs_mentioning(needle: &str) -> Vec<String> {
    LOGS.0.lock().unwrap().iter().filter(|l| l.contains(needle)).cloned().collect()
}

fn cfg(endpoint: &str) -> BackendConfig {
    BackendConfig {
        backoff_ms: 1,
        ..BackendConfig::http(endpoint, "test-model")
    }
}

fn ok_text(text: &str) -> (u16, String) {
    (200, json!({ "text": text }).to_string())
}

#[test]
fn throttled_twice_then_answered() {
    capture_logs();
    let (url, seen) = stub(vec![(429, "{}".into()), (429, "{}".into()), ok_text("hello")]);
    let chat = HttpChat::new(cfg(&format!("{url}/retry-case"))).unwrap();
    let done = chat.complete_raw(&LlmRequest::text("sys", "user")).unwrap();
    assert_eq!(done.text, "hello");
    assert_eq!(done.attempts, 3);
    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 3);
    let body: Value = serde_json::from_str(&seen[2].body).unwrap();
    assert_eq!(body, json!({"model": "test-model", "system": "sys", "prompt": "user"}));
    let attempts = logs_mentioning("/retry-case attempt");
    assert_eq!(attempts.len(), 3, "{attempts:?}");
    assert!(attempts[0].contains("attempt 1/4") && attempts[0].contains("429"));
    assert!(attempts[2].contains("attempt 3/4") && attempts[2].contains("200"));
}

#[test]
fn server_errors_exhaust_the_retries() {
    let (url, seen) = stub(vec![(503, "{}".into()); 3]);
    let chat = HttpChat::new(BackendConfig {
        max_retries: 2,
        ..cfg(&url)
    })
    .unwrap();
    let err = chat.complete_raw(&LlmRequest::text("s", "u")).unwrap_err();
    assert_eq!(err.code(), "gateway-unavailable");
    assert!(err.to_string().contains("after 3 attempts"), "{err}");
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let (url, seen) = stub(vec![(400, "{}".into()), ok_text("never")]);
    let chat = HttpChat::new(cfg(&url)).unwrap();
    assert_eq!(chat.complete_raw(&LlmRequest::text("s", "u")).unwrap_err().code(), "gateway-unavailable");
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn refused_connection_is_unavailable() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let chat = HttpChat::new(BackendConfig {
        max_retries: 1,
        ..cfg(&format!("http://127.0.0.1:{port}"))
    })
    .unwrap();
    let err = chat.complete_raw(&LlmRequest::text("s", "u")).unwrap_err();
    assert_eq!(err.code(), "gateway-unavailable");
    assert!(err.to_string().contains("after 2 attempts"));
}

#[test]
fn credential_is_sent_but_never_logged() {
    capture_logs();
    let secret = "sk-test-5f1d0a9c3b7e";
    std::env::set_var("AGORA_HTTP_TEST_KEY", secret);
    let (url, seen) = stub(vec![(500, "{}".into()), ok_text("fine")]);
    let chat = HttpChat::new(BackendConfig {
        auth_env_var: Some("AGORA_HTTP_TEST_KEY".into()),
        ..cfg(&format!("{url}/secret-case"))
    })
    .unwrap();
    chat.complete_raw(&LlmRequest::text("s", "u")).unwrap();
    let seen = seen.lock().unwrap();
    assert!(seen.iter().all(|s| s.authorization.as_deref() == Some(&format!("Bearer {secret}")[..])));
    assert_eq!(logs_mentioning("/secret-case").len(), 2);
    assert!(logs_mentioning(secret).is_empty());
    let cfg_json = serde_json::to_string(chat.0.config()).unwrap();
    assert!(!cfg_json.contains(secret));
    assert!(!format!("{:?}", chat.0.config()).contains(secret));
}

#[test]
fn openai_flavor_paths_and_payloads() {
    let png = MockImages::render_one("x", 1, 0).unwrap();
    let b64 = base64::engine::general_purpose::STANDARD.encode(&png);
    let (url, seen) = stub(vec![
        (200, json!({"choices": [{"message": {"content": "hi"}}]}).to_string()),
        (200, json!({"data": [{"b64_json": b64}]}).to_string()),
    ]);
    let base = BackendConfig {
        flavor: ApiFlavor::Openai,
        temperature: Some(0.5),
        ..cfg(&format!("{url}/v1/"))
    };
    let chat = HttpChat::new(base.clone()).unwrap();
    assert_eq!(chat.complete_raw(&LlmRequest::text("s", "u")).unwrap().text, "hi");
    let images = HttpImages::new(base).unwrap();
    let out = images.render(&ImageRequest::new("a red barn", 1, Some(9))).unwrap();
    assert_eq!(out, vec![png]);

    let seen = seen.lock().unwrap();
    assert_eq!(seen[0].request_line, "POST /v1/chat/completions HTTP/1.1");
    let chat_body: Value = serde_json::from_str(&seen[0].body).unwrap();
    assert_eq!(chat_body["messages"][0], json!({"role": "system", "content": "s"}));
    assert_eq!(chat_body["temperature"], 0.5);
    assert_eq!(seen[1].request_line, "POST /v1/images/generations HTTP/1.1");
    let img_body: Value = serde_json::from_str(&seen[1].body).unwrap();
    assert_eq!((img_body["n"].as_u64(), img_body["seed"].as_u64()), (Some(1), Some(9)));
}

#[test]
fn live_wiki_search_and_counts() {
    let (url, seen) = stub(vec![
        (
            200,
            json!({"pages": [{"id": 7, "key": "Roman_gladiator", "title": "Roman gladiator"}]}).to_string(),
        ),
        (200, json!({"count": 120, "limit": false}).to_string()),
        (200, json!({"count": 30, "limit": false}).to_string()),
    ]);
    let wiki = HttpWiki::new(BackendConfig {
        backoff_ms: 1,
        ..BackendConfig::http(url, "")
    })
    .unwrap();
    let pages = wiki.search("Roman gladiator", 50).unwrap();
    assert_eq!(pages.len(), 1);
    assert_eq!(pages[0].page_id, 7);
    assert_eq!(wiki.edit_counts(&pages[0]).unwrap(), (120, 30));
    let seen = seen.lock().unwrap();
    assert!(seen[0].request_line.starts_with("GET "), "{}", seen[0].request_line);
    assert!(seen[0].request_line.contains("/w/rest.php/v1/search/page?q=Roman+gladiator&limit=50"), "{}", seen[0].request_line);
    assert_eq!(seen[1].request_line, "GET /w/rest.php/v1/page/Roman_gladiator/history/counts/edits HTTP/1.1");
    assert_eq!(seen[2].request_line, "GET /w/rest.php/v1/page/Roman_gladiator/history/counts/editors HTTP/1.1");
}
