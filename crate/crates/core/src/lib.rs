//! Core of the language design assistant.
//!
//! A designer composes a small language out of building blocks stored in a
//! [`knowledge::KnowledgeBase`], guided by a [`session::DesignSession`] that
//! tracks consequences, conflicts and advice. A finalized design compiles to
//! a [`metalang::LanguageDescription`], which drives the generated tools in
//! [`toolgen`]. [`ppbe`] infers formatting rules from formatted examples.

pub mod api;
pub mod canonical;
pub mod knowledge;
pub mod metalang;
pub mod ppbe;
pub mod report;
pub mod session;
pub mod toolgen;

pub use knowledge::{ConceptId, KnowledgeBase};
pub use metalang::LanguageDescription;
pub use report::{Issue, ValidationReport};
pub use session::{Decision, DesignSession, LanguageDesign};
