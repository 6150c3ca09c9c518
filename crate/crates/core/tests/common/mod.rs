#![allow(dead_code)]

pub mod box_oracle;
pub mod checks;
pub mod calc_oracle;
pub mod cfg_oracle;
pub mod kb_oracle;

use std::path::{Path, PathBuf};

use lda_core::knowledge::{load_kb, KnowledgeBase};
use lda_core::metalang::{compile_design, LanguageDescription};
use lda_core::session::{finalize, replay, Decision};

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(repo_root().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn seed_kb() -> KnowledgeBase {
    load_kb(&read("kb/core.kb.json")).expect("seed KB loads")
}

pub fn seed_doc() -> serde_json::Value {
    serde_json::from_str(&read("kb/core.kb.json")).expect("seed KB is JSON")
}

pub fn log(rel: &str) -> Vec<Decision> {
    serde_json::from_str(&read(rel)).expect("decision log parses")
}

pub fn describe(kb: &KnowledgeBase, log_path: &str, name: &str) -> LanguageDescription {
    let session = replay(kb, &log(log_path)).expect("log replays");
    let design = finalize(kb, &session, name, "Prog").expect("design finalizes");
    compile_design(&design).expect("design compiles")
}

pub fn calc() -> LanguageDescription {
    describe(&seed_kb(), "fixtures/calc.decisions.json", "calc")
}

pub fn calccond() -> LanguageDescription {
    describe(&seed_kb(), "fixtures/calccond.decisions.json", "calccond")
}

/// `.ex` files of a directory, sorted by name.
pub fn corpus(rel: &str) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(repo_root().join(rel))
        .unwrap_or_else(|e| panic!("{rel}: {e}"))
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "ex"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}
