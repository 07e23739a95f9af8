//! Worker-side evaluation and behaviour cloning (placeholder while scaffolding).
