//! Tool results, their wire form and the canonical digest used for replay.

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    NameError,
    ArgsError,
    ExecutionError,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::NameError => "name_error",
            ErrorKind::ArgsError => "args_error",
            ErrorKind::ExecutionError => "execution_error",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ContentBlock {
    Text(String),
    Image { bytes: Vec<u8>, media_type: String, width: usize, height: usize },
    Data(Value),
}

impl ContentBlock {
    fn to_value(&self, inline_images: bool) -> Value {
        match self {
            ContentBlock::Text(text) => json!({"type": "text", "text": text}),
            ContentBlock::Image { bytes, media_type, width, height } => {
                let mut v = json!({"type": "image", "mimeType": media_type, "width": width, "height": height});
                if inline_images {
                    v["data"] = Value::String(BASE64.encode(bytes));
                } else {
                    v["sha256"] = Value::String(hex::encode(Sha256::digest(bytes)));
                }
                v
            }
            ContentBlock::Data(data) => json!({"type": "data", "data": data}),
        }
    }

    fn from_value(v: &Value) -> Result<Self, String> {
        let field = |name: &str| v.get(name).ok_or_else(|| format!("content block missing '{name}'"));
        match v.get("type").and_then(Value::as_str) {
            Some("text") => Ok(ContentBlock::Text(field("text")?.as_str().ok_or("text must be a string")?.to_string())),
            Some("image") => {
                let data = field("data")?.as_str().ok_or("image data must be base64")?;
                let dim = |name: &str| -> Result<usize, String> {
                    field(name)?.as_u64().map(|d| d as usize).ok_or_else(|| format!("image {name} must be an integer"))
                };
                Ok(ContentBlock::Image {
                    bytes: BASE64.decode(data).map_err(|e| e.to_string())?,
                    media_type: field("mimeType")?.as_str().ok_or("mimeType must be a string")?.to_string(),
                    width: dim("width")?,
                    height: dim("height")?,
                })
            }
            Some("data") => Ok(ContentBlock::Data(field("data")?.clone())),
            other => Err(format!("unknown content block type {other:?}")),
        }
    }
}

/// Outcome of one tool call. Errors are in-band: `error_kind` is set exactly
/// when `is_error` is.
#[derive(Debug, Clone, PartialEq)]
pub struct ToolResult {
    pub content: Vec<ContentBlock>,
    pub is_error: bool,
    pub error_kind: Option<ErrorKind>,
}

impl ToolResult {
    pub fn success(content: Vec<ContentBlock>) -> Self {
        debug_assert!(!content.is_empty());
        ToolResult { content, is_error: false, error_kind: None }
    }

    pub fn error(kind: ErrorKind, message: impl Into<String>, detail: Value) -> Self {
        let mut content = vec![ContentBlock::Text(message.into())];
        if !detail.is_null() {
            content.push(ContentBlock::Data(detail));
        }
        ToolResult { content, is_error: true, error_kind: Some(kind) }
    }

    fn to_value(&self, inline_images: bool) -> Value {
        let mut v = json!({
            "content": self.content.iter().map(|b| b.to_value(inline_images)).collect::<Vec<_>>(),
            "isError": self.is_error,
        });
        if let Some(kind) = self.error_kind {
            v["errorKind"] = Value::String(kind.as_str().into());
        }
        v
    }

    /// Wire form with base64 image payloads.
    pub fn to_wire(&self) -> Value {
        self.to_value(true)
    }

    pub fn from_wire(v: &Value) -> Result<Self, String> {
        let blocks = v.get("content").and_then(Value::as_array).ok_or("result missing 'content' array")?;
        let content = blocks.iter().map(ContentBlock::from_value).collect::<Result<Vec<_>, _>>()?;
        let is_error = v.get("isError").and_then(Value::as_bool).ok_or("result missing 'isError'")?;
        let error_kind = match v.get("errorKind") {
            None | Some(Value::Null) => None,
            Some(k) => Some(serde_json::from_value(k.clone()).map_err(|e| e.to_string())?),
        };
        if is_error != error_kind.is_some() {
            return Err("isError and errorKind disagree".into());
        }
        Ok(ToolResult { content, is_error, error_kind })
    }

    /// Sorted-key JSON in which image payloads are replaced by their SHA-256.
    pub fn canonical_json(&self) -> String {
        canonical_string(&self.to_value(false))
    }

    /// Hex SHA-256 of [`canonical_json`](Self::canonical_json).
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn text(&self) -> Option<&str> {
        self.content.iter().find_map(|b| match b {
            ContentBlock::Text(t) => Some(t.as_str()),
            _ => None,
        })
    }

    pub fn data(&self) -> Option<&Value> {
        self.content.iter().find_map(|b| match b {
            ContentBlock::Data(d) => Some(d),
            _ => None,
        })
    }
}

impl Serialize for ToolResult {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_wire().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ToolResult {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        ToolResult::from_wire(&v).map_err(serde::de::Error::custom)
    }
}

/// Compact JSON with object keys in byte order at every depth.
pub fn canonical_string(v: &Value) -> String {
    // serde_json's default map is a BTreeMap, so keys serialize sorted
    serde_json::to_string(v).expect("JSON values always serialize")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ToolResult {
        ToolResult::success(vec![
            ContentBlock::Text("slice".into()),
            ContentBlock::Image { bytes: vec![1, 2, 3], media_type: "image/png".into(), width: 2, height: 1 },
            ContentBlock::Data(json!({"z": 1, "a": [1.5, null]})),
        ])
    }

    #[test]
    fn wire_round_trip() {
        let r = sample();
        let back = ToolResult::from_wire(&r.to_wire()).unwrap();
        assert_eq!(back, r);
        let err = ToolResult::error(ErrorKind::ArgsError, "bad", json!({"path": "$.x"}));
        assert_eq!(ToolResult::from_wire(&err.to_wire()).unwrap(), err);
        let text = serde_json::to_string(&err).unwrap();
        assert!(text.contains("\"errorKind\":\"args_error\""));
    }

    #[test]
    fn canonical_form_hashes_images_and_sorts_keys() {
        let c = sample().canonical_json();
        assert!(c.contains(&sha256_hex(&[1, 2, 3])));
        assert!(!c.contains("AQID"));
        assert!(c.contains("{\"a\":[1.5,null],\"z\":1}"));
    }

    #[test]
    fn digest_changes_with_pixels() {
        let mut other = sample();
        if let ContentBlock::Image { bytes, .. } = &mut other.content[1] {
            bytes[0] = 9;
        }
        assert_ne!(sample().digest(), other.digest());
        assert_eq!(sample().digest(), sample().digest());
    }

    #[test]
    fn inconsistent_error_flags_rejected() {
        let v = json!({"content": [{"type": "text", "text": "x"}], "isError": true});
        assert!(ToolResult::from_wire(&v).is_err());
    }
}
