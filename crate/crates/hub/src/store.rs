//! One directory per id: `v<N>.pv.json`, `v<N>.static.svg` and `meta.json`.
//! Version files are written once and never touched again.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use augvis_core::anchor::AnchorPayload;
use augvis_core::artifacts::{anchor_payload, local_id, render_reference, render_virtual};
use augvis_core::augment::compile;
use augvis_core::spec::{canonicalize, parse_spec, validate_schema, Spec};
use augvis_core::validator::{validate_compiled, ValidationReport, Verdict};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HubError {
    #[error("invalid spec")]
    InvalidSpec(serde_json::Value),
    #[error("validation failed")]
    ValidationFailed(Box<ValidationReport>),
    #[error("unknown id {0}")]
    UnknownId(String),
    #[error("unknown version {0}")]
    UnknownVersion(u64),
    #[error("spec has no ar block")]
    NoArBlock,
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl HubError {
    pub fn code(&self) -> &'static str {
        match self {
            HubError::InvalidSpec(_) => "InvalidSpec",
            HubError::ValidationFailed(_) => "ValidationFailed",
            HubError::UnknownId(_) => "UnknownId",
            HubError::UnknownVersion(_) => "UnknownVersion",
            HubError::NoArBlock => "NoArBlock",
            HubError::Io(_) => "Internal",
        }
    }

    pub fn detail(&self) -> serde_json::Value {
        match self {
            HubError::InvalidSpec(d) => d.clone(),
            HubError::ValidationFailed(r) => r.to_json(),
            other => json!(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "camelCase")]
pub struct VersionMeta {
    pub version: u64,
    pub published_at: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Meta {
    pub id: String,
    pub versions: Vec<VersionMeta>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Receipt {
    pub id: String,
    pub version: u64,
    pub anchor: AnchorPayload,
    pub static_render_url: String,
}

impl Receipt {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "id": self.id,
            "version": self.version,
            "anchorPayload": serde_json::from_str::<serde_json::Value>(&self.anchor.to_canonical()).unwrap(),
            "staticRenderURL": self.static_render_url,
        })
    }
}

/// Result of a publish: the receipt and whether a new version was written.
#[derive(Debug, Clone, PartialEq)]
pub struct Published {
    pub receipt: Receipt,
    pub created: bool,
    pub report: Option<ValidationReport>,
}

pub struct Store {
    root: PathBuf,
    hub_url: String,
    writer: Mutex<()>,
}

fn is_id(id: &str) -> bool {
    id.len() == 16 && id.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

/// Parse and schema-check a spec document.
pub fn check_spec(text: &str) -> Result<Spec, HubError> {
    let spec = parse_spec(text).map_err(|e| HubError::InvalidSpec(json!([{"code": "ParseError", "path": "", "message": e.to_string()}])))?;
    let issues = validate_schema(&spec);
    if !issues.is_empty() {
        return Err(HubError::InvalidSpec(json!(issues)));
    }
    Ok(spec)
}

fn compile_error(e: impl std::fmt::Display) -> HubError {
    HubError::InvalidSpec(json!([{"code": "CompileError", "path": "", "message": e.to_string()}]))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}

impl Store {
    pub fn open(root: impl Into<PathBuf>, hub_url: impl Into<String>) -> io::Result<Store> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Store {
            root,
            hub_url: hub_url.into().trim_end_matches('/').to_string(),
            writer: Mutex::new(()),
        })
    }

    pub fn hub_url(&self) -> &str {
        &self.hub_url
    }

    fn dir(&self, id: &str) -> PathBuf {
        self.root.join(id)
    }

    pub fn meta(&self, id: &str) -> Result<Meta, HubError> {
        if !is_id(id) {
            return Err(HubError::UnknownId(id.to_string()));
        }
        match fs::read(self.dir(id).join("meta.json")) {
            Ok(bytes) => serde_json::from_slice(&bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e).into()),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Err(HubError::UnknownId(id.to_string())),
            Err(e) => Err(e.into()),
        }
    }

    fn resolve(&self, id: &str, version: Option<u64>) -> Result<u64, HubError> {
        let meta = self.meta(id)?;
        let latest = meta.versions.last().map(|v| v.version).unwrap_or(0);
        match version {
            None => Ok(latest),
            Some(v) if v >= 1 && v <= latest => Ok(v),
            Some(v) => Err(HubError::UnknownVersion(v)),
        }
    }

    fn receipt(&self, spec: &Spec, id: &str, version: u64) -> Receipt {
        Receipt {
            id: id.to_string(),
            version,
            anchor: anchor_payload(spec, id, version, &self.hub_url),
            static_render_url: format!("{}/specs/{id}/reference?v={version}", self.hub_url),
        }
    }

    /// Publish a spec. With `target` set the spec becomes a new version of
    /// that id; otherwise the id is derived from the canonical bytes.
    pub fn publish(&self, text: &str, target: Option<&str>, force: bool) -> Result<Published, HubError> {
        let spec = check_spec(text)?;
        let compiled = compile(&spec).map_err(compile_error)?;
        let report = if compiled.has_virtual() {
            let r = validate_compiled(&spec, &compiled).map_err(compile_error)?;
            if r.verdict == Verdict::Invalid && !force {
                return Err(HubError::ValidationFailed(Box::new(r)));
            }
            Some(r)
        } else {
            None
        };
        let canonical = canonicalize(&spec);
        let id = match target {
            Some(id) => {
                self.meta(id)?;
                id.to_string()
            }
            None => local_id(&spec),
        };

        let _guard = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        let dir = self.dir(&id);
        let mut meta = match self.meta(&id) {
            Ok(m) => m,
            Err(HubError::UnknownId(_)) => Meta {
                id: id.clone(),
                versions: Vec::new(),
            },
            Err(e) => return Err(e),
        };
        if let Some(last) = meta.versions.last() {
            let stored = fs::read(dir.join(format!("v{}.pv.json", last.version)))?;
            if stored == canonical.as_bytes() {
                return Ok(Published {
                    receipt: self.receipt(&spec, &id, last.version),
                    created: false,
                    report,
                });
            }
        }
        let version = meta.versions.len() as u64 + 1;
        let receipt = self.receipt(&spec, &id, version);
        fs::create_dir_all(&dir)?;
        write_atomic(&dir.join(format!("v{version}.pv.json")), canonical.as_bytes())?;
        write_atomic(
            &dir.join(format!("v{version}.static.svg")),
            render_reference(&compiled, &receipt.anchor).as_bytes(),
        )?;
        let published_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        meta.versions.push(VersionMeta { version, published_at });
        write_atomic(&dir.join("meta.json"), serde_json::to_string_pretty(&meta).unwrap().as_bytes())?;
        Ok(Published {
            receipt,
            created: true,
            report,
        })
    }

    pub fn spec_bytes(&self, id: &str, version: Option<u64>) -> Result<Vec<u8>, HubError> {
        let v = self.resolve(id, version)?;
        Ok(fs::read(self.dir(id).join(format!("v{v}.pv.json")))?)
    }

    pub fn reference(&self, id: &str, version: Option<u64>) -> Result<Vec<u8>, HubError> {
        let v = self.resolve(id, version)?;
        Ok(fs::read(self.dir(id).join(format!("v{v}.static.svg")))?)
    }

    fn stored_spec(&self, id: &str, version: Option<u64>) -> Result<(Spec, u64), HubError> {
        let v = self.resolve(id, version)?;
        let bytes = fs::read(self.dir(id).join(format!("v{v}.pv.json")))?;
        let text = String::from_utf8(bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        Ok((check_spec(&text)?, v))
    }

    /// Rendered on every request from the stored spec.
    pub fn virtual_layer(&self, id: &str, version: Option<u64>) -> Result<String, HubError> {
        let (spec, _) = self.stored_spec(id, version)?;
        if spec.ar.is_none() {
            return Err(HubError::NoArBlock);
        }
        let compiled = compile(&spec).map_err(compile_error)?;
        render_virtual(&compiled).ok_or(HubError::NoArBlock)
    }

    pub fn anchor(&self, id: &str, version: Option<u64>) -> Result<AnchorPayload, HubError> {
        let (spec, v) = self.stored_spec(id, version)?;
        Ok(anchor_payload(&spec, id, v, &self.hub_url))
    }
}
