//! The bundled signup-flow fixture.

pub const SCW_MODEL: &str = include_str!("../fixtures/scw/aut.toml");
pub const SCW_VULN: &str = include_str!("../fixtures/scw/vuln.toml");
