//! Wire-level session against a phantom data root, compared with a checked-in
//! transcript. Set `CTFLOW_UPDATE_GOLDEN=1` to rewrite it.

mod common;

use ctflow_mcp::server::{INVALID_PARAMS, INVALID_REQUEST, METHOD_NOT_FOUND, NOT_INITIALIZED, PARSE_ERROR};
use ctflow_mcp::Server;
use serde_json::Value;

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/session.jsonl");

/// Requests of the scripted session. `#`-lines start a fresh server.
const SESSION: &[&str] = &[
    r#"{"jsonrpc":"2.0","id":1,"method":"initialize","params":{"protocolVersion":"2024-11-05","clientInfo":{"name":"golden","version":"0"}}}"#,
    r#"{"jsonrpc":"2.0","method":"notifications/initialized"}"#,
    r#"{"jsonrpc":"2.0","id":2,"method":"tools/list"}"#,
    r#"{"jsonrpc":"2.0","id":3,"method":"tools/list","params":{"categories":["ingestion"]}}"#,
    r#"{"jsonrpc":"2.0","id":4,"method":"tools/list","params":{"categories":["global","advanced"]}}"#,
    r#"{"jsonrpc":"2.0","id":5,"method":"tools/call","params":{"name":"load_data","arguments":{"path":"chest.nii.gz"}}}"#,
    r#"{"jsonrpc":"2.0","id":6,"method":"tools/call","params":{"name":"measure_distance","arguments":{"p1":[0,0,0],"p2":[3,4,0]}}}"#,
    r#"{"jsonrpc":"2.0","id":7,"method":"tools/call","params":{"name":"view_slcie","arguments":{"index":3}}}"#,
    r#"{"jsonrpc":"2.0","id":8,"method":"tools/call","params":{"name":"view_slice","arguments":{"index":9999}}}"#,
    r#"{"jsonrpc":"2.0","id":9,"method":"tools/call","params":{"name":"view_slice","arguments":{"index":5,"window":"lung"}}}"#,
    r#"{"jsonrpc":"2.0","id":10,"method":"initialize","params":{}}"#,
    r#"{"jsonrpc":"2.0","id":11,"method":"tools/list","params":{"categories":["imaging"]}}"#,
    r#"{"jsonrpc":"2.0","id":12,"method":"resources/list"}"#,
    r#"{"jsonrpc":"2.0","method":"no/such/notification"}"#,
    r#"{"id":13,"method":"tools/list"}"#,
    r#"{"jsonrpc":"2.0","id":14,"method":"tools/call","params":{"name":"load_data","arguments":{"path":"../../etc/x"}}}"#,
    "this is not json",
    "#",
    r#"{"jsonrpc":"2.0","id":1,"method":"tools/call","params":{"name":"list_window_presets","arguments":{}}}"#,
];

fn run_session() -> Vec<String> {
    let dir = common::data_root();
    let mut server = Server::new(common::toolbox(&dir));
    let mut out = Vec::new();
    for line in SESSION {
        if *line == "#" {
            server = Server::new(common::toolbox(&dir));
            out.push("#".to_string());
            continue;
        }
        out.push(format!("> {line}"));
        if let Some(resp) = server.handle_line(line) {
            assert!(!resp.contains('\n'));
            out.push(format!("< {resp}"));
        }
    }
    out
}

fn response(transcript: &[String], id: i64) -> Value {
    transcript
        .iter()
        .filter_map(|l| l.strip_prefix("< "))
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .find(|v| v["id"] == id)
        .unwrap_or_else(|| panic!("no response for id {id}"))
}

#[test]
fn session_semantics() {
    let t = run_session();
    let init = response(&t, 1);
    assert_eq!(init["result"]["protocolVersion"], "2024-11-05");
    assert_eq!(init["result"]["serverInfo"]["name"], "ctflow");
    assert!(init["result"]["capabilities"]["tools"].is_object());

    let all = response(&t, 2)["result"]["tools"].as_array().unwrap().clone();
    assert_eq!(all.len(), 24);
    let per_cat = |c: &str| all.iter().filter(|d| d["category"] == c).count();
    assert_eq!([per_cat("ingestion"), per_cat("global"), per_cat("detail"), per_cat("advanced")], [6, 4, 8, 6]);
    assert!(all.iter().all(|d| d["inputSchema"]["type"] == "object"));
    assert_eq!(response(&t, 3)["result"]["tools"].as_array().unwrap().len(), 6);
    assert_eq!(response(&t, 4)["result"]["tools"].as_array().unwrap().len(), 10);

    assert_eq!(response(&t, 5)["result"]["isError"], false);
    let dist = &response(&t, 6)["result"];
    assert_eq!(dist["content"][1], serde_json::json!({"type": "data", "data": {"mm": 5.0}}));

    let typo = &response(&t, 7)["result"];
    assert_eq!((typo["isError"].clone(), typo["errorKind"].clone()), (true.into(), "name_error".into()));
    assert_eq!(typo["content"][1]["data"]["suggestions"].as_array().unwrap().len(), 3);
    assert_eq!(response(&t, 8)["result"]["errorKind"], "args_error");
    let img = &response(&t, 9)["result"]["content"][1];
    assert_eq!((img["type"].as_str(), img["mimeType"].as_str()), (Some("image"), Some("image/png")));

    assert_eq!(response(&t, 10)["error"]["code"], INVALID_REQUEST);
    assert_eq!(response(&t, 11)["error"]["code"], INVALID_PARAMS);
    assert_eq!(response(&t, 12)["error"]["code"], METHOD_NOT_FOUND);
    assert_eq!(response(&t, 13)["error"]["code"], INVALID_REQUEST);
    assert_eq!(response(&t, 14)["result"]["errorKind"], "args_error");

    let parse = t.iter().find(|l| l.starts_with("< ") && l.contains(&PARSE_ERROR.to_string())).unwrap();
    let parse: Value = serde_json::from_str(&parse[2..]).unwrap();
    assert_eq!(parse["id"], Value::Null);

    // notifications produce nothing, so every request line has exactly one reply
    let requests = t.iter().filter(|l| l.starts_with("> ")).count();
    let replies = t.iter().filter(|l| l.starts_with("< ")).count();
    assert_eq!(requests - replies, 2);

    let last: Value = serde_json::from_str(&t.last().unwrap()[2..]).unwrap();
    assert_eq!(last["error"]["code"], NOT_INITIALIZED);
}

#[test]
fn transcript_is_byte_stable() {
    let first = run_session().join("\n") + "\n";
    let second = run_session().join("\n") + "\n";
    assert_eq!(first, second);
    if std::env::var_os("CTFLOW_UPDATE_GOLDEN").is_some() {
        std::fs::write(GOLDEN, &first).unwrap();
    }
    let golden = std::fs::read_to_string(GOLDEN).expect("golden transcript missing; rerun with CTFLOW_UPDATE_GOLDEN=1");
    assert!(golden == first, "transcript drifted from {GOLDEN}");
}

#[test]
fn serve_loop_frames_lines() {
    let dir = common::data_root();
    let mut server = Server::new(common::toolbox(&dir));
    let input = concat!(
        r#"{"jsonrpc":"2.0","id":"a","method":"initialize"}"#,
        "\n\n",
        r#"{"jsonrpc":"2.0","method":"notifications/initialized"}"#,
        "\n",
        r#"{"jsonrpc":"2.0","id":7,"method":"tools/list"}"#,
        "\n"
    );
    let mut out = Vec::new();
    server.serve(input.as_bytes(), &mut out).unwrap();
    let lines: Vec<Value> = String::from_utf8(out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["id"], "a");
    assert_eq!(lines[1]["id"], 7);
}
