//! Named domains and maps referenced from scenario files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{
    affine, bump_field, constant, identity, linear, quadratic_example, random_polynomial, sphere_valued_map, sum, trig,
    zero, Domain, SmoothMap,
};

use super::scenario::{CheckKind, DomainRef, MapRef};

/// Inputs handed to a map builder. The map's dimension is the domain's.
pub struct MapArgs<'a> {
    pub domain: &'a Domain,
    pub params: &'a [f64],
    pub args: Vec<SmoothMap>,
}

impl MapArgs<'_> {
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    fn expect_params(&self, name: &str, count: usize) -> Result<()> {
        if self.params.len() != count {
            return Err(Error::Argument(format!("`{name}` takes {count} params, got {}", self.params.len())));
        }
        Ok(())
    }

    fn expect_args(&self, name: &str, count: usize) -> Result<()> {
        if self.args.len() != count {
            return Err(Error::Argument(format!("`{name}` takes {count} map args, got {}", self.args.len())));
        }
        Ok(())
    }
}

pub type MapBuilder = Arc<dyn Fn(MapArgs<'_>) -> Result<SmoothMap> + Send + Sync>;
pub type DomainBuilder = Arc<dyn Fn(&[f64]) -> Result<Domain> + Send + Sync>;

#[derive(Clone)]
pub struct MapEntry {
    pub signature: String,
    pub summary: String,
    builder: MapBuilder,
}

#[derive(Clone)]
pub struct DomainEntry {
    pub signature: String,
    pub summary: String,
    builder: DomainBuilder,
}

#[derive(Clone, Default)]
pub struct Registry {
    maps: BTreeMap<String, MapEntry>,
    domains: BTreeMap<String, DomainEntry>,
}

fn integer(v: f64, what: &str) -> Result<u64> {
    if v.fract() != 0.0 || !(0.0..=u32::MAX as f64).contains(&v) {
        return Err(Error::Argument(format!("{what} must be a non-negative integer, got {v}")));
    }
    Ok(v as u64)
}

impl Registry {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register_domain("unit_ball", "[n]", "unit ball in R^n, atlas for n <= 4", |p| {
            Domain::unit_ball(Self::dim_param(p)?)
        });
        r.register_domain("unit_box", "[n]", "unit cube [0,1]^n, atlas for n <= 4", |p| {
            Domain::unit_box(Self::dim_param(p)?)
        });
        r.register_domain("ellipse", "[a, b]", "ellipse with semi-axes a, b", |p| match p {
            [a, b] => Domain::ellipse(*a, *b),
            _ => Err(Error::Argument(format!("`ellipse` takes 2 params, got {}", p.len()))),
        });

        r.register_map("identity", "[]", "x", |m| {
            m.expect_params("identity", 0)?;
            identity(m.dim())
        });
        r.register_map("zero", "[]", "0", |m| {
            m.expect_params("zero", 0)?;
            zero(m.dim())
        });
        r.register_map("constant", "[c_1..c_n]", "constant vector c", |m| {
            m.expect_params("constant", m.dim())?;
            constant(m.params.to_vec())
        });
        r.register_map("linear", "[a_11..a_nn]", "Ax, A row-major", |m| {
            m.expect_params("linear", m.dim() * m.dim())?;
            linear(m.dim(), m.params.to_vec())
        });
        r.register_map("affine", "[a_11..a_nn, b_1..b_n]", "Ax + b, A row-major", |m| {
            let n = m.dim();
            m.expect_params("affine", n * n + n)?;
            affine(n, m.params[..n * n].to_vec(), m.params[n * n..].to_vec())
        });
        r.register_map("quadratic", "[]", "(x^2, xy), n = 2 only", |m| {
            m.expect_params("quadratic", 0)?;
            if m.dim() != 2 {
                return Err(Error::Argument("`quadratic` needs a 2-dimensional domain".into()));
            }
            quadratic_example()
        });
        r.register_map("polynomial", "[degree, seed, scale]", "x plus seeded monomials", |m| {
            m.expect_params("polynomial", 3)?;
            let degree = integer(m.params[0], "degree")? as u32;
            random_polynomial(m.dim(), degree, integer(m.params[1], "seed")?, m.params[2])
        });
        r.register_map("trig", "[strength]", "x plus sin, cos and exp coupling terms", |m| {
            m.expect_params("trig", 1)?;
            trig(m.dim(), m.params[0])
        });
        r.register_map("bump", "[c_1..c_n, r, a_1..a_n]", "a exp(1 - 1/(1 - |x-c|^2/r^2)), zero outside", |m| {
            let n = m.dim();
            m.expect_params("bump", 2 * n + 1)?;
            bump_field(m.params[..n].to_vec(), m.params[n], m.params[n + 1..].to_vec())
        });
        r.register_map("sum", "[] args: maps", "pointwise sum of the argument maps", |m| {
            m.expect_params("sum", 0)?;
            if m.args.is_empty() {
                return Err(Error::Argument("`sum` needs at least one map arg".into()));
            }
            sum(m.args)
        });
        r.register_map("sphere_valued", "[] args: g", "g/|g|, g bounded away from 0 on the domain", |m| {
            m.expect_params("sphere_valued", 0)?;
            m.expect_args("sphere_valued", 1)?;
            sphere_valued_map(&m.args[0], m.domain)
        });
        r
    }

    fn dim_param(p: &[f64]) -> Result<usize> {
        match p {
            [n] => Ok(integer(*n, "dimension")? as usize),
            _ => Err(Error::Argument(format!("expected 1 param [n], got {}", p.len()))),
        }
    }

    /// Adds or replaces a map under `name`.
    pub fn register_map<F>(&mut self, name: &str, signature: &str, summary: &str, builder: F)
    where
        F: Fn(MapArgs<'_>) -> Result<SmoothMap> + Send + Sync + 'static,
    {
        let entry = MapEntry { signature: signature.into(), summary: summary.into(), builder: Arc::new(builder) };
        self.maps.insert(name.to_string(), entry);
    }

    pub fn register_domain<F>(&mut self, name: &str, signature: &str, summary: &str, builder: F)
    where
        F: Fn(&[f64]) -> Result<Domain> + Send + Sync + 'static,
    {
        let entry = DomainEntry { signature: signature.into(), summary: summary.into(), builder: Arc::new(builder) };
        self.domains.insert(name.to_string(), entry);
    }

    pub fn has_map(&self, name: &str) -> bool {
        self.maps.contains_key(name)
    }

    pub fn has_domain(&self, name: &str) -> bool {
        self.domains.contains_key(name)
    }

    pub fn build_domain(&self, r: &DomainRef) -> Result<Domain> {
        let entry = self.domains.get(&r.name).ok_or_else(|| Error::Argument(format!("unknown domain `{}`", r.name)))?;
        (entry.builder)(&r.params)
    }

    pub fn build_map(&self, r: &MapRef, domain: &Domain) -> Result<SmoothMap> {
        let entry = self.maps.get(&r.name).ok_or_else(|| Error::Argument(format!("unknown map `{}`", r.name)))?;
        let args = r.args.iter().map(|a| self.build_map(a, domain)).collect::<Result<Vec<_>>>()?;
        (entry.builder)(MapArgs { domain, params: &r.params, args })
    }

    /// First unknown map name in `r`, with its field path relative to `r`.
    pub fn unknown_map(&self, r: &MapRef) -> Option<(String, String)> {
        if !self.has_map(&r.name) {
            return Some(("name".into(), r.name.clone()));
        }
        r.args
            .iter()
            .enumerate()
            .find_map(|(i, a)| self.unknown_map(a).map(|(path, name)| (format!("args[{i}].{path}"), name)))
    }

    /// Sections `domains`, `maps`, `checks`, each sorted by name.
    pub fn list(&self) -> String {
        let mut out = String::new();
        let width = self
            .maps
            .iter()
            .map(|(k, v)| k.len() + v.signature.len())
            .chain(self.domains.iter().map(|(k, v)| k.len() + v.signature.len()))
            .max()
            .unwrap_or(0)
            + 2;
        out.push_str("domains:\n");
        for (name, e) in &self.domains {
            let head = format!("{name} {}", e.signature);
            let _ = writeln!(out, "  {head:<width$} {}", e.summary);
        }
        out.push_str("maps:\n");
        for (name, e) in &self.maps {
            let head = format!("{name} {}", e.signature);
            let _ = writeln!(out, "  {head:<width$} {}", e.summary);
        }
        out.push_str("checks:\n");
        for c in CheckKind::ALL {
            let _ = writeln!(out, "  {:<width$} {}", c.name(), c.summary());
        }
        out
    }
}

/// Listing of the built-in registry.
pub fn list_registry() -> String {
    Registry::with_builtins().list()
}
