//! Artifact staging: everything is written to a sibling temporary location
//! and moved into place only when the command finishes without error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rhmsp::analysis::{CheckReport, Table};
use serde_json::{json, Value};

pub struct Staging {
    target: PathBuf,
    tmp: PathBuf,
    file_mode: bool,
    config: Value,
    committed: bool,
}

fn exists_nonempty(p: &Path) -> bool {
    match fs::metadata(p) {
        Ok(m) if m.is_dir() => fs::read_dir(p).map(|mut d| d.next().is_some()).unwrap_or(true),
        Ok(_) => true,
        Err(_) => false,
    }
}

/// Companion of `x.csv` holding its metadata: `x.meta.json`.
pub fn sidecar_name(csv: &str) -> String {
    format!("{}.meta.json", csv.strip_suffix(".csv").unwrap_or(csv))
}

impl Staging {
    /// `out` ending in `.csv` is a single-file target; anything else a directory.
    pub fn new(out: &Path, force: bool, config: Value) -> Result<Self, String> {
        let file_mode = out.extension().is_some_and(|e| e == "csv");
        if file_mode {
            let side = out.with_file_name(sidecar_name(&out.file_name().unwrap().to_string_lossy()));
            if !force && (exists_nonempty(out) || exists_nonempty(&side)) {
                return Err(format!("{} exists; pass --force to replace it", out.display()));
            }
        } else if !force && exists_nonempty(out) {
            return Err(format!("{} is not empty; pass --force to replace it", out.display()));
        }
        let name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
        let parent = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        fs::create_dir_all(parent).map_err(|e| format!("{}: {e}", parent.display()))?;
        let tmp = parent.join(format!(".{name}.partial-{}", std::process::id()));
        if tmp.exists() {
            fs::remove_dir_all(&tmp).map_err(|e| e.to_string())?;
        }
        fs::create_dir_all(&tmp).map_err(|e| format!("{}: {e}", tmp.display()))?;
        Ok(Self { target: out.to_path_buf(), tmp, file_mode, config, committed: false })
    }

    fn put(&self, rel: &str, bytes: &[u8]) -> Result<(), String> {
        let p = self.tmp.join(rel);
        if let Some(d) = p.parent() {
            fs::create_dir_all(d).map_err(|e| e.to_string())?;
        }
        let mut f = fs::File::create(&p).map_err(|e| format!("{}: {e}", p.display()))?;
        f.write_all(bytes).map_err(|e| e.to_string())
    }

    /// In file mode the CSV becomes the target itself; `rel` is ignored.
    pub fn csv(&self, rel: &str, bytes: &[u8], meta: Value) -> Result<String, String> {
        let rel = if self.file_mode { self.target.file_name().unwrap().to_string_lossy().into_owned() } else { rel.to_string() };
        self.put(&rel, bytes)?;
        let mut meta = meta;
        meta["config"] = self.config.clone();
        self.put(&sidecar_name(&rel), &pretty(&meta))?;
        Ok(rel)
    }

    pub fn json(&self, rel: &str, mut v: Value) -> Result<(), String> {
        v["config"] = self.config.clone();
        self.put(rel, &pretty(&v))
    }

    pub fn text(&self, rel: &str, s: &str) -> Result<(), String> {
        self.put(rel, s.as_bytes())
    }

    /// `<dir>/<check>.json` plus one CSV per table.
    pub fn report(&self, dir: &str, r: &mut CheckReport) -> Result<(), String> {
        let stem = if dir.is_empty() { r.check.clone() } else { format!("{dir}/{}", r.check) };
        let mut arts = Vec::new();
        for t in &r.tables {
            let rel = format!("{stem}.{}.csv", t.name);
            self.csv(&rel, &table_csv(t), json!({ "check": r.check, "table": t.name }))?;
            arts.push(rel);
        }
        r.artifacts = arts;
        self.json(&format!("{stem}.json"), r.to_json())
    }

    pub fn commit(mut self) -> Result<(), String> {
        if self.file_mode {
            let name = self.target.file_name().unwrap().to_string_lossy().into_owned();
            let side = sidecar_name(&name);
            let dest_side = self.target.with_file_name(&side);
            fs::rename(self.tmp.join(&name), &self.target).map_err(|e| e.to_string())?;
            fs::rename(self.tmp.join(&side), &dest_side).map_err(|e| e.to_string())?;
            fs::remove_dir_all(&self.tmp).map_err(|e| e.to_string())?;
        } else {
            if self.target.exists() {
                fs::remove_dir_all(&self.target).map_err(|e| format!("{}: {e}", self.target.display()))?;
            }
            fs::rename(&self.tmp, &self.target).map_err(|e| e.to_string())?;
        }
        self.committed = true;
        Ok(())
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.tmp);
        }
    }
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("json value serializes");
    s.push(b'\n');
    s
}

pub fn table_csv(t: &Table) -> Vec<u8> {
    let mut s = t.header.join(",");
    s.push('\n');
    for row in &t.rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s.into_bytes()
}
