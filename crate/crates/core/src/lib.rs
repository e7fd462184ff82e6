pub mod algebra;
pub mod expr;
pub mod oracle;
pub mod diffring;
pub mod telescope;
pub mod reduce;
pub mod corpus;
