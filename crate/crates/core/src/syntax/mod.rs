//! Abstract syntax, concrete grammar, binding operations and printing.

mod ast;
mod binding;
mod parser;
mod printer;
mod transform;

pub use ast::{Field, Loc, Method, MethodType, SplitMethod, Term, Type, Variance};
pub use binding::{
    alpha_eq_term, alpha_eq_type, free_type_vars, free_vars, fresh_name, map_annotations, map_subterms,
    rename_locs, subst_term, subst_term1, subst_type, subst_term_and_type, subst_type_in_term, subst_types, FreeVars, ValueEnv,
};
pub use parser::{is_keyword, parse_term, parse_type, ParseError};
pub use printer::{print_term, print_type};
pub use transform::{
    desugar_self, desugar_self_in_term, erase_annotations, has_self_types, term_to_json, type_to_json,
};
