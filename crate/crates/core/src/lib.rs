//! A semantics-preserving TeX-subset document compiler.
//!
//! The pipeline: source text is tokenized under mutable category codes,
//! macro-expanded and digested into a semantic XML tree, then lowered to
//! XHTML5 pages with embedded MathML and SVG, and optionally packaged as
//! an EPUB3 archive.  Control sequences get their meaning from a binding
//! registry: macros, primitive handlers, and constructors that emit XML
//! structure directly.

pub mod bindings;
pub mod catcode;
pub mod dimension;
pub mod doc;
pub mod engine;
pub mod epub;
pub mod graphics;
pub mod math;
pub mod postprocess;
pub mod token;
pub mod tokenizer;
pub mod xml;

pub use catcode::{Catcode, CatcodeTable};
pub use dimension::Dimension;
pub use doc::{DocNode, Document};
pub use token::Token;
