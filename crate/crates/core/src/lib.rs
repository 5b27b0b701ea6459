pub mod cli;
pub mod corpus;
pub mod encoder;
pub mod eval;
pub mod tokenizer;
pub mod vocab_expand;
