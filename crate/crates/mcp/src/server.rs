//! JSON-RPC 2.0 framing over newline-delimited stdio.

use std::io::{BufRead, Write};

use serde_json::{json, Value};

use crate::registry::Category;
use crate::toolbox::Toolbox;

pub const PROTOCOL_VERSION: &str = "2024-11-05";
pub const SERVER_NAME: &str = "ctflow";

pub const PARSE_ERROR: i64 = -32700;
pub const INVALID_REQUEST: i64 = -32600;
pub const METHOD_NOT_FOUND: i64 = -32601;
pub const INVALID_PARAMS: i64 = -32602;
/// Any request other than `initialize` before the handshake.
pub const NOT_INITIALIZED: i64 = -32002;

fn error(id: Value, code: i64, message: impl Into<String>) -> Value {
    json!({"jsonrpc": "2.0", "id": id, "error": {"code": code, "message": message.into()}})
}

fn reply(id: Value, result: Value) -> Value {
    json!({"jsonrpc": "2.0", "id": id, "result": result})
}

/// Protocol state around one [`Toolbox`].
#[derive(Debug)]
pub struct Server {
    toolbox: Toolbox,
    initialized: bool,
}

impl Server {
    pub fn new(toolbox: Toolbox) -> Self {
        Server { toolbox, initialized: false }
    }

    pub fn toolbox(&self) -> &Toolbox {
        &self.toolbox
    }

    /// One input line in, at most one output line out. Notifications and
    /// blank lines produce nothing.
    pub fn handle_line(&mut self, line: &str) -> Option<String> {
        if line.trim().is_empty() {
            return None;
        }
        let response = match serde_json::from_str::<Value>(line) {
            Ok(msg) => self.handle(msg),
            Err(_) => Some(error(Value::Null, PARSE_ERROR, "Parse error: invalid JSON")),
        };
        response.map(|r| r.to_string())
    }

    pub fn handle(&mut self, msg: Value) -> Option<Value> {
        let Some(obj) = msg.as_object() else {
            return Some(error(Value::Null, INVALID_REQUEST, "request must be an object"));
        };
        let id = obj.get("id").cloned();
        let id_valid = matches!(id, None | Some(Value::Number(_) | Value::String(_)));
        if obj.get("jsonrpc").and_then(Value::as_str) != Some("2.0") || !id_valid {
            return Some(error(if id_valid { id.unwrap_or(Value::Null) } else { Value::Null }, INVALID_REQUEST, "invalid JSON-RPC 2.0 request"));
        }
        let Some(method) = obj.get("method").and_then(Value::as_str) else {
            return Some(error(id.unwrap_or(Value::Null), INVALID_REQUEST, "missing method"));
        };
        let params = obj.get("params").cloned().unwrap_or(Value::Null);
        // notifications are fire-and-forget, whatever the method
        let id = id?;
        Some(match self.dispatch(method, &params) {
            Ok(result) => reply(id, result),
            Err((code, message)) => error(id, code, message),
        })
    }

    fn dispatch(&mut self, method: &str, params: &Value) -> Result<Value, (i64, String)> {
        if method == "initialize" {
            if self.initialized {
                return Err((INVALID_REQUEST, "AlreadyInitialized: session is already initialized".into()));
            }
            self.initialized = true;
            return Ok(json!({
                "protocolVersion": PROTOCOL_VERSION,
                "serverInfo": {"name": SERVER_NAME, "version": env!("CARGO_PKG_VERSION")},
                "capabilities": {"tools": {"listChanged": false}},
            }));
        }
        if !self.initialized {
            return Err((NOT_INITIALIZED, "NotInitialized: call initialize first".into()));
        }
        match method {
            "ping" => Ok(json!({})),
            "tools/list" => {
                let filter = match params.get("categories") {
                    None | Some(Value::Null) => None,
                    Some(Value::Array(items)) => Some(
                        items
                            .iter()
                            .map(|c| {
                                c.as_str()
                                    .ok_or_else(|| "categories must be strings".to_string())
                                    .and_then(|s| s.parse::<Category>().map_err(|e| e.to_string()))
                            })
                            .collect::<Result<Vec<_>, _>>()
                            .map_err(|m| (INVALID_PARAMS, m))?,
                    ),
                    Some(_) => return Err((INVALID_PARAMS, "categories must be an array".into())),
                };
                let tools = self.toolbox.list_tools(filter.as_deref());
                Ok(json!({"tools": tools}))
            }
            "tools/call" => {
                let name = params
                    .get("name")
                    .and_then(Value::as_str)
                    .ok_or((INVALID_PARAMS, "tools/call requires a string 'name'".to_string()))?;
                let args = params.get("arguments").cloned().unwrap_or(Value::Null);
                let result = self.toolbox.call_tool(name, &args).map_err(|e| (INVALID_PARAMS, e.to_string()))?;
                Ok(result.to_wire())
            }
            other => Err((METHOD_NOT_FOUND, format!("Method not found: {other}"))),
        }
    }

    /// Reads requests until EOF, writing one response line per request.
    pub fn serve(&mut self, input: impl BufRead, mut output: impl Write) -> std::io::Result<()> {
        for line in input.lines() {
            if let Some(out) = self.handle_line(&line?) {
                writeln!(output, "{out}")?;
                output.flush()?;
            }
        }
        Ok(())
    }
}
