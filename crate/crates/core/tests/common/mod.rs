#![allow(dead_code)]

use std::path::Path;

use ccreduce_core::extraction::{build_cache, RefactoringCache};
use ccreduce_core::frontend::{list_methods, parse, CompilationUnit, SourceFile};
use ccreduce_core::graph::{build_graph, ConflictGraph};
use ccreduce_core::metrics::{annotate_method, AnnotatedMethod};

pub struct Analysis {
    pub source: SourceFile,
    pub unit: CompilationUnit,
    pub annotated: AnnotatedMethod,
    pub cache: RefactoringCache,
    pub graph: ConflictGraph,
}

pub fn analyze(source: SourceFile, method: &str) -> Analysis {
    let unit = parse(&source).expect("fixture parses");
    let decl = list_methods(&unit).into_iter().find(|m| m.name.name == method).expect("method present").clone();
    let annotated = annotate_method(&decl);
    let cache = build_cache(&annotated, &source);
    let graph = build_graph(&cache);
    Analysis { source, unit, annotated, cache, graph }
}

pub fn hook() -> Analysis {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/EZInjection.java");
    analyze(SourceFile::read(&path).expect("fixture readable"), "hook")
}

/// Char offset of the first occurrence of `needle` in the fixture text.
pub fn offset_of(source: &SourceFile, needle: &str) -> usize {
    let byte = source.text.find(needle).unwrap_or_else(|| panic!("{needle:?} not in fixture"));
    source.text[..byte].chars().count()
}
