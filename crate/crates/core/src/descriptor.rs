//! Text formats and their loaders.
//!
//! Flow descriptors (`[group] [psi] [Y] [generators] [flows] [orbits]`)
//! present a Floer complex by its flow lines and closed orbits. CW
//! descriptors (`[group] [cells] [boundary]`) present the cellular chain
//! complex of the universal abelian cover. Serialized states (`[kernel]
//! [generators] [boundary] [eta]`) store a [`FloerState`] exactly, and move
//! scripts list handle-slides and births/deaths one per line.
//!
//! Monomials are written `g1^2*g2^-1` over the generator names of `[group]`;
//! coordinates of the series base can also be given literally as
//! `g^(a,b;t)`, which is how series are rendered. `O(>r)` marks a
//! truncation. `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::complex::{GradedComplex, Grading, TorsionValue, UnitWitness};
use crate::engine::{FloerState, Move};
use crate::error::{Error, Result};
use crate::fields::{character_split, CharacterSplit};
use crate::group::{build_group, split_by_psi, GradingGroup, GroupElement, Presentation, PsiSplitting, WeightHom};
use crate::laurent::Laurent;
use crate::novikov::{Novikov, SeriesBase};
use crate::scalar::{parse_rational, parse_weight, Cutoff, Weight};
use crate::zeta::{eta_from_orbits, OrbitLedger};
use crate::RatSeries;

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn verr(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Validation(format!("line {line}: {msg}"))
}

struct Section {
    name: String,
    body: Vec<(usize, String)>,
}

fn split_sections(text: &str, allowed: &[&str]) -> Result<Vec<Section>> {
    let mut out: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").replace('\u{2212}', "-");
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| perr(line, "unterminated section header"))?.trim();
            if !allowed.contains(&name) {
                return Err(perr(line, format!("unknown section [{name}]")));
            }
            if out.iter().any(|s| s.name == name) {
                return Err(perr(line, format!("section [{name}] appears twice")));
            }
            out.push(Section { name: name.to_string(), body: Vec::new() });
        } else {
            let s = out.last_mut().ok_or_else(|| perr(line, "content before the first section header"))?;
            s.body.push((line, content.to_string()));
        }
    }
    Ok(out)
}

fn body<'a>(sections: &'a [Section], name: &str) -> &'a [(usize, String)] {
    sections.iter().find(|s| s.name == name).map(|s| s.body.as_slice()).unwrap_or(&[])
}

fn has_section(sections: &[Section], name: &str) -> bool {
    sections.iter().any(|s| s.name == name)
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn ident(s: &str, line: usize) -> Result<String> {
    if is_ident(s) {
        Ok(s.to_string())
    } else {
        Err(perr(line, format!("bad name {s:?}")))
    }
}

/// The line after its first `n` whitespace-separated tokens.
fn rest_after(s: &str, n: usize) -> &str {
    let mut rest = s.trim_start();
    for _ in 0..n {
        let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        rest = rest[end..].trim_start();
    }
    rest
}

fn parse_sign(s: &str, line: usize) -> Result<i8> {
    match s {
        "+" | "+1" => Ok(1),
        "-" | "-1" => Ok(-1),
        _ => Err(perr(line, format!("expected a sign + or -, found {s:?}"))),
    }
}

fn sign_str(s: i8) -> &'static str {
    if s < 0 {
        "-"
    } else {
        "+"
    }
}

fn parse_int(s: &str, line: usize, what: &str) -> Result<i64> {
    s.parse().map_err(|_| perr(line, format!("expected an integer {what}, found {s:?}")))
}

// ---------------------------------------------------------------------------
// series text

#[derive(Clone, Debug, PartialEq)]
struct RawTerm {
    coeff: BigRational,
    named: Vec<(String, i64)>,
    literal: Option<(Vec<i64>, Vec<i64>)>,
}

#[derive(Clone, Debug, PartialEq)]
struct RawSeries {
    terms: Vec<RawTerm>,
    cutoff: Cutoff,
}

fn split_terms(s: &str, line: usize) -> Result<Vec<(bool, String)>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut neg = false;
    let mut cur = String::new();
    let mut prev: Option<char> = None;
    for c in s.chars().filter(|c| !c.is_whitespace()) {
        if c == '(' {
            depth += 1;
        } else if c == ')' {
            depth -= 1;
            if depth < 0 {
                return Err(perr(line, "unbalanced parentheses"));
            }
        }
        let sign = depth == 0 && (c == '+' || c == '-') && !matches!(prev, Some('^' | '*' | '/'));
        if sign {
            if !cur.is_empty() {
                out.push((neg, std::mem::take(&mut cur)));
                neg = false;
            }
            if c == '-' {
                neg = !neg;
            }
        } else {
            cur.push(c);
        }
        prev = Some(c);
    }
    if depth != 0 {
        return Err(perr(line, "unbalanced parentheses"));
    }
    if cur.is_empty() {
        return Err(perr(line, "expression ends without a term"));
    }
    out.push((neg, cur));
    Ok(out)
}

fn int_list(s: &str, line: usize) -> Result<Vec<i64>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(|x| parse_int(x, line, "coordinate")).collect()
}

fn parse_series_text(text: &str, line: usize) -> Result<RawSeries> {
    let mut terms = Vec::new();
    let mut cutoff = Cutoff::Infinite;
    for (neg, body) in split_terms(text, line)? {
        if let Some(r) = body.strip_prefix("O(>").and_then(|r| r.strip_suffix(')')) {
            if neg || cutoff != Cutoff::Infinite {
                return Err(perr(line, "misplaced truncation marker"));
            }
            cutoff = Cutoff::Finite(parse_weight(r).ok_or_else(|| perr(line, format!("bad cutoff {r:?}")))?);
            continue;
        }
        let mut t = RawTerm { coeff: BigRational::one(), named: Vec::new(), literal: None };
        for factor in body.split('*') {
            if factor.is_empty() {
                return Err(perr(line, "empty factor"));
            }
            if let Some(inner) = factor.strip_prefix("g^(").and_then(|r| r.strip_suffix(')')) {
                if t.literal.is_some() {
                    return Err(perr(line, "two coordinate literals in one term"));
                }
                let (f, tor) = inner.split_once(';').unwrap_or((inner, ""));
                t.literal = Some((int_list(f, line)?, int_list(tor, line)?));
            } else if factor.starts_with(|c: char| c.is_ascii_digit()) {
                let c = parse_rational(factor).ok_or_else(|| perr(line, format!("bad coefficient {factor:?}")))?;
                t.coeff *= c;
            } else {
                let (name, exp) = match factor.split_once('^') {
                    Some((n, e)) => (n, parse_int(e, line, "exponent")?),
                    None => (factor, 1),
                };
                t.named.push((ident(name, line)?, exp));
            }
        }
        if neg {
            t.coeff = -t.coeff;
        }
        terms.push(t);
    }
    Ok(RawSeries { terms, cutoff })
}

fn render_coeff_monomial(out: &mut String, first: bool, c: &BigRational, mono: &str) {
    let neg = c < &BigRational::zero();
    let a = if neg { -c.clone() } else { c.clone() };
    match (first, neg) {
        (true, true) => out.push('-'),
        (true, false) => {}
        (false, true) => out.push_str(" - "),
        (false, false) => out.push_str(" + "),
    }
    if mono == "1" {
        let _ = write!(out, "{a}");
    } else if a.is_one() {
        out.push_str(mono);
    } else {
        let _ = write!(out, "{a}*{mono}");
    }
}

// ---------------------------------------------------------------------------
// groups

/// A finitely generated abelian group by named generators and relations.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GroupSpec {
    pub names: Vec<String>,
    /// exponent vectors that are trivial in the group
    pub relations: Vec<Vec<i64>>,
}

impl GroupSpec {
    fn parse(lines: &[(usize, String)]) -> Result<Self> {
        let mut g = GroupSpec::default();
        for (line, text) in lines {
            let mut toks = text.split_whitespace();
            if toks.next() == Some("generators") {
                for t in toks {
                    let n = ident(t, *line)?;
                    if g.names.contains(&n) {
                        return Err(perr(*line, format!("generator {n} listed twice")));
                    }
                    g.names.push(n);
                }
            }
        }
        for (line, text) in lines {
            let mut toks = text.split_whitespace();
            match toks.next() {
                Some("generators") => {}
                Some("relation") => {
                    let r = g.monomial(rest_after(text, 1), *line)?;
                    g.relations.push(r);
                }
                Some(other) => return Err(perr(*line, format!("expected 'generators' or 'relation', found {other:?}"))),
                None => {}
            }
        }
        Ok(g)
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    fn exponents(&self, named: &[(String, i64)], line: usize) -> Result<Vec<i64>> {
        let mut e = vec![0; self.names.len()];
        for (n, k) in named {
            let i = self.index(n).ok_or_else(|| perr(line, format!("unknown group generator {n}")))?;
            e[i] += k;
        }
        Ok(e)
    }

    /// A monomial such as `t^2*s^-1` or `1`.
    pub fn monomial(&self, text: &str, line: usize) -> Result<Vec<i64>> {
        let raw = parse_series_text(text, line)?;
        match raw.terms.as_slice() {
            [t] if t.coeff.is_one() && t.literal.is_none() && raw.cutoff.is_infinite() => self.exponents(&t.named, line),
            _ => Err(perr(line, format!("expected a monomial, found {text:?}"))),
        }
    }

    /// Integer-free polynomial over the named generators.
    fn polynomial(&self, text: &str, line: usize) -> Result<Vec<(BigRational, Vec<i64>)>> {
        let raw = parse_series_text(text, line)?;
        if !raw.cutoff.is_infinite() {
            return Err(perr(line, "truncation marker in an exact polynomial"));
        }
        raw.terms
            .iter()
            .map(|t| {
                if t.literal.is_some() {
                    return Err(perr(line, "coordinate literal in a named polynomial"));
                }
                Ok((t.coeff.clone(), self.exponents(&t.named, line)?))
            })
            .collect()
    }

    pub fn render_monomial(&self, e: &[i64]) -> String {
        let parts: Vec<String> = self
            .names
            .iter()
            .zip(e)
            .filter(|(_, &k)| k != 0)
            .map(|(n, &k)| if k == 1 { n.clone() } else { format!("{n}^{k}") })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    fn render_polynomial(&self, p: &[(BigRational, Vec<i64>)]) -> String {
        if p.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (c, e)) in p.iter().enumerate() {
            render_coeff_monomial(&mut out, i == 0, c, &self.render_monomial(e));
        }
        out
    }

    fn render(&self, out: &mut String) {
        out.push_str("[group]\ngenerators");
        for n in &self.names {
            let _ = write!(out, " {n}");
        }
        out.push('\n');
        for r in &self.relations {
            let _ = writeln!(out, "relation {}", self.render_monomial(r));
        }
    }

    pub fn presentation(&self) -> Result<Presentation> {
        build_group(&self.relations, self.names.len())
    }
}

// ---------------------------------------------------------------------------
// flow descriptors

#[derive(Clone, Debug)]
pub struct GeneratorSpec {
    pub name: String,
    pub ind: i64,
    /// offset of the chosen lift from the base lift
    pub lift: Vec<i64>,
    pub line: usize,
}

#[derive(Clone, Debug)]
pub struct FlowLine {
    pub source: String,
    pub target: String,
    pub sign: i8,
    pub class: Vec<i64>,
    pub line: usize,
}

#[derive(Clone, Debug)]
pub struct OrbitSpec {
    pub class: Vec<i64>,
    pub sign: i8,
    pub mult: u32,
    /// also list the covers `(kA, sign, k*mult)` up to the working cutoff
    pub covers: bool,
    pub line: usize,
}

#[derive(Clone, Debug)]
pub struct FlowDescriptor {
    pub group: GroupSpec,
    pub psi: Vec<i64>,
    pub y: Vec<Weight>,
    pub generators: Vec<GeneratorSpec>,
    pub flows: Vec<FlowLine>,
    pub orbits: Vec<OrbitSpec>,
}

fn named_values<T: Clone>(
    group: &GroupSpec,
    lines: &[(usize, String)],
    zero: T,
    parse: impl Fn(&str, usize) -> Result<T>,
) -> Result<Vec<T>> {
    let mut vals = vec![zero; group.names.len()];
    let mut seen = vec![false; group.names.len()];
    for (line, text) in lines {
        let toks: Vec<&str> = text.split_whitespace().collect();
        let [name, value] = toks.as_slice() else {
            return Err(perr(*line, "expected '<generator> <value>'"));
        };
        let i = group.index(name).ok_or_else(|| perr(*line, format!("unknown group generator {name}")))?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(perr(*line, format!("value for {name} given twice")));
        }
        vals[i] = parse(value, *line)?;
    }
    Ok(vals)
}

fn parse_generators(lines: &[(usize, String)], group: Option<&GroupSpec>) -> Result<Vec<GeneratorSpec>> {
    lines
        .iter()
        .map(|(line, text)| {
            let toks: Vec<&str> = text.split_whitespace().collect();
            if toks.len() < 2 || (group.is_none() && toks.len() > 2) {
                return Err(perr(*line, "expected '<name> <index> [lift]'"));
            }
            let lift = match group {
                Some(g) if toks.len() > 2 => g.monomial(rest_after(text, 2), *line)?,
                Some(g) => vec![0; g.names.len()],
                None => Vec::new(),
            };
            Ok(GeneratorSpec { name: ident(toks[0], *line)?, ind: parse_int(toks[1], *line, "index")?, lift, line: *line })
        })
        .collect()
}

impl FlowDescriptor {
    pub fn parse(text: &str) -> Result<Self> {
        let secs = split_sections(text, &["group", "psi", "Y", "generators", "flows", "orbits"])?;
        let group = GroupSpec::parse(body(&secs, "group"))?;
        let psi = named_values(&group, body(&secs, "psi"), 0i64, |s, l| parse_int(s, l, "psi value"))?;
        let y = named_values(&group, body(&secs, "Y"), Weight::zero(), |s, l| {
            parse_weight(s).ok_or_else(|| perr(l, format!("bad rational {s:?}")))
        })?;
        let generators = parse_generators(body(&secs, "generators"), Some(&group))?;
        let flows = body(&secs, "flows")
            .iter()
            .map(|(line, text)| {
                let toks: Vec<&str> = text.split_whitespace().collect();
                if toks.len() < 4 {
                    return Err(perr(*line, "expected '<source> <target> <sign> <class>'"));
                }
                Ok(FlowLine {
                    source: ident(toks[0], *line)?,
                    target: ident(toks[1], *line)?,
                    sign: parse_sign(toks[2], *line)?,
                    class: group.monomial(rest_after(text, 3), *line)?,
                    line: *line,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let orbits = body(&secs, "orbits")
            .iter()
            .map(|(line, text)| {
                let toks: Vec<&str> = text.split_whitespace().collect();
                let covers = match toks.get(3) {
                    None => false,
                    Some(&"covers") if toks.len() == 4 => true,
                    _ => return Err(perr(*line, "expected '<class> <sign> <mult> [covers]'")),
                };
                if toks.len() < 3 {
                    return Err(perr(*line, "expected '<class> <sign> <mult> [covers]'"));
                }
                let mult = toks[2]
                    .parse::<u32>()
                    .ok()
                    .filter(|&m| m > 0)
                    .ok_or_else(|| perr(*line, format!("multiplicity must be a positive integer, found {:?}", toks[2])))?;
                Ok(OrbitSpec {
                    class: group.monomial(toks[0], *line)?,
                    sign: parse_sign(toks[1], *line)?,
                    mult,
                    covers,
                    line: *line,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FlowDescriptor { group, psi, y, generators, flows, orbits })
    }

    /// Canonical text; parsing it back and rendering again is the identity.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.group.render(&mut out);
        out.push_str("[psi]\n");
        for (n, v) in self.group.names.iter().zip(&self.psi) {
            let _ = writeln!(out, "{n} {v}");
        }
        out.push_str("[Y]\n");
        for (n, v) in self.group.names.iter().zip(&self.y) {
            let _ = writeln!(out, "{n} {v}");
        }
        out.push_str("[generators]\n");
        for g in &self.generators {
            let _ = writeln!(out, "{} {} {}", g.name, g.ind, self.group.render_monomial(&g.lift));
        }
        out.push_str("[flows]\n");
        for f in &self.flows {
            let _ = writeln!(out, "{} {} {} {}", f.source, f.target, sign_str(f.sign), self.group.render_monomial(&f.class));
        }
        out.push_str("[orbits]\n");
        for o in &self.orbits {
            let _ = write!(out, "{} {} {}", self.group.render_monomial(&o.class), sign_str(o.sign), o.mult);
            out.push_str(if o.covers { " covers\n" } else { "\n" });
        }
        out
    }
}

/// How monomials in a script or serialized series resolve to elements of
/// the series base.
#[derive(Clone, Debug)]
pub struct Symbols {
    base: Arc<SeriesBase>,
    named: Option<(GroupSpec, Presentation, PsiSplitting)>,
}

impl Symbols {
    /// Only coordinate literals `g^(..)` are understood.
    pub fn literal(base: &Arc<SeriesBase>) -> Self {
        Symbols { base: base.clone(), named: None }
    }

    fn element(&self, t: &RawTerm, line: usize) -> Result<GroupElement> {
        let group = &self.base.group;
        let mut g = group.identity();
        if !t.named.is_empty() {
            let (spec, pres, splitting) =
                self.named.as_ref().ok_or_else(|| perr(line, "named monomials need a [group] section"))?;
            let e = spec.exponents(&t.named, line)?;
            let a = pres.project(&e);
            if !splitting.in_kernel(&a) {
                return Err(verr(line, format!("class {} is not in ker psi", spec.render_monomial(&e))));
            }
            g = splitting.project(&a);
        }
        if let Some((f, tor)) = &t.literal {
            let l = group.element(f.clone(), tor.clone()).map_err(|e| perr(line, e.to_string()))?;
            g = group.add(&g, &l);
        }
        Ok(g)
    }

    pub fn series(&self, text: &str, line: usize) -> Result<RatSeries> {
        let raw = parse_series_text(text, line)?;
        let items = raw.terms.iter().map(|t| Ok((self.element(t, line)?, t.coeff.clone()))).collect::<Result<Vec<_>>>()?;
        Ok(Novikov::from_terms(&self.base, &(), items, raw.cutoff))
    }
}

/// Renders elements of a series base in the generator names of a `[group]`
/// section. Kernel elements are pulled back through the splitting.
#[derive(Clone, Debug)]
pub struct Namer {
    spec: GroupSpec,
    presentation: Presentation,
    splitting: Option<PsiSplitting>,
}

impl Namer {
    pub fn element(&self, g: &GroupElement) -> String {
        let ambient = match &self.splitting {
            Some(s) => s.embed(g),
            None => g.clone(),
        };
        self.spec.render_monomial(&self.presentation.preimage(&ambient))
    }

    /// Terms in increasing weight, then the truncation.
    pub fn series(&self, a: &RatSeries) -> String {
        let mut out = String::new();
        if a.terms().is_empty() {
            out.push('0');
        }
        for (i, t) in a.terms().iter().enumerate() {
            render_coeff_monomial(&mut out, i == 0, &t.coeff, &self.element(&t.elem));
        }
        if let Cutoff::Finite(r) = a.cutoff() {
            let _ = write!(out, " + O(>{r})");
        }
        out
    }

    /// Highest exponents first, so `t - 1` rather than `-1 + t`.
    fn laurent(&self, split: &CharacterSplit, f: &[i64], l: &Laurent) -> String {
        let mut out = String::new();
        if l.is_zero() {
            out.push('0');
        }
        let group = &split.source().group;
        let terms: Vec<_> = l.terms().collect();
        for (i, (k, c)) in terms.into_iter().rev().enumerate() {
            let g = group.free_element(split.join_free(f, k));
            let mono = self.element(&g);
            match c.as_rational() {
                Some(q) => render_coeff_monomial(&mut out, i == 0, q, &mono),
                None => {
                    if i > 0 {
                        out.push_str(" + ");
                    }
                    if mono == "1" {
                        let _ = write!(out, "({c})");
                    } else {
                        let _ = write!(out, "({c})*{mono}");
                    }
                }
            }
        }
        out
    }

    /// One line per field component, in the names of `[group]`; roots of
    /// unity appear as `zm^j`. Over a weight-zero base nothing is truncated
    /// and no `O(..)` is shown.
    pub fn torsion(&self, tau: &TorsionValue) -> Vec<String> {
        let split = tau.split();
        let graded = !split.source().weight.is_zero();
        tau.components()
            .iter()
            .map(|comp| {
                let mut out = String::new();
                for (i, t) in comp.terms().iter().enumerate() {
                    let num = self.laurent(split, &t.elem.free, t.coeff.numerator());
                    let den = t.coeff.denominator();
                    let part = match den.as_constant() {
                        Some(c) if c.is_one() => num,
                        _ => {
                            let zero = vec![0; t.elem.free.len()];
                            let num = if num.contains([' ', '*']) { format!("({num})") } else { num };
                            format!("{num}/({})", self.laurent(split, &zero, den))
                        }
                    };
                    match (i, part.strip_prefix('-')) {
                        (0, _) => out.push_str(&part),
                        (_, Some(rest)) => {
                            let _ = write!(out, " - {rest}");
                        }
                        (_, None) => {
                            let _ = write!(out, " + {part}");
                        }
                    }
                }
                if out.is_empty() {
                    out.push('0');
                }
                if let (true, Cutoff::Finite(r)) = (graded, comp.cutoff()) {
                    let _ = write!(out, " + O(>{r})");
                }
                out
            })
            .collect()
    }
}

/// Names for the `H_1` group of a CW descriptor.
pub fn cw_namer(d: &CwDescriptor) -> Result<Namer> {
    Ok(Namer { spec: d.group.clone(), presentation: d.group.presentation()?, splitting: None })
}

/// A loaded flow descriptor: the state together with the coordinates used
/// to read it.
#[derive(Clone, Debug)]
pub struct LoadedFlow {
    pub descriptor: FlowDescriptor,
    pub presentation: Presentation,
    pub splitting: PsiSplitting,
    pub state: FloerState,
}

impl LoadedFlow {
    pub fn namer(&self) -> Namer {
        Namer {
            spec: self.descriptor.group.clone(),
            presentation: self.presentation.clone(),
            splitting: Some(self.splitting.clone()),
        }
    }

    pub fn symbols(&self) -> Symbols {
        Symbols {
            base: self.state.base().clone(),
            named: Some((self.descriptor.group.clone(), self.presentation.clone(), self.splitting.clone())),
        }
    }
}

pub fn load_flow_descriptor(d: &FlowDescriptor, cutoff: Weight) -> Result<LoadedFlow> {
    let pres = d.group.presentation()?;
    let psi = pres.sf_hom(&d.psi)?;
    let splitting = split_by_psi(&pres.group, &psi)?;
    let weight = splitting.restrict(&pres.weight_hom(&d.y)?.negated());
    let base = SeriesBase::new(splitting.kernel.clone(), weight)?;
    let split = Arc::new(character_split(&base)?);

    let mut index = BTreeMap::new();
    for (i, g) in d.generators.iter().enumerate() {
        if !(0..2).contains(&g.ind) {
            return Err(verr(g.line, format!("index of {} must be 0 or 1", g.name)));
        }
        if index.insert(g.name.as_str(), i).is_some() {
            return Err(verr(g.line, format!("generator {} listed twice", g.name)));
        }
    }
    if splitting.n_psi != 0 {
        // grading of a lift shifted by A is ind + psi(A)
        let gr = |g: &GeneratorSpec| g.ind + psi.eval(&pres.project(&g.lift));
        for x in &d.generators {
            for y in &d.generators {
                let diff = gr(x) - gr(y);
                if diff.abs() >= 2 * splitting.n_psi {
                    return Err(verr(
                        x.line.max(y.line),
                        format!(
                            "lift admissibility fails for {} and {}: |gr| = {} >= 2N_psi = {}",
                            x.name,
                            y.name,
                            diff.abs(),
                            2 * splitting.n_psi
                        ),
                    ));
                }
            }
        }
    }

    let gens = d.generators.iter().map(|g| (g.name.clone(), g.ind)).collect();
    let mut complex = GradedComplex::<BigRational>::new(Grading::Z2, &base, &(), gens)?;
    let mut entries: BTreeMap<(usize, usize), Vec<(GroupElement, BigRational)>> = BTreeMap::new();
    for f in &d.flows {
        let look = |n: &str| index.get(n).copied().ok_or_else(|| verr(f.line, format!("unknown generator {n}")));
        let (x, y) = (look(&f.source)?, look(&f.target)?);
        if (d.generators[x].ind - d.generators[y].ind).rem_euclid(2) != 1 {
            return Err(verr(f.line, format!("flow line {} -> {} does not lower the index by 1 mod 2", f.source, f.target)));
        }
        let a = splitting.project(&pres.project(&f.class));
        entries.entry((y, x)).or_default().push((a, BigRational::from_integer(f.sign.into())));
    }
    for ((y, x), terms) in entries {
        complex.set_entry(y, x, Novikov::from_terms(&base, &(), terms, Cutoff::Infinite));
    }

    let mut ledger = OrbitLedger::default();
    for o in &d.orbits {
        let a = pres.project(&o.class);
        if !splitting.in_kernel(&a) {
            return Err(verr(o.line, format!("orbit class {} is not in ker psi", d.group.render_monomial(&o.class))));
        }
        let k = splitting.project(&a);
        let w = base.weight_of(&k);
        if w <= Weight::zero() {
            return Err(verr(o.line, format!("orbit class {} has weight {w} <= 0", d.group.render_monomial(&o.class))));
        }
        if o.covers {
            ledger.push_covers(&base, &k, o.sign, o.mult, cutoff)?;
        } else {
            ledger.push(k, o.sign, o.mult);
        }
    }
    let eta = eta_from_orbits(&base, &ledger)?;
    let state = FloerState::new(split, complex, eta, cutoff)?;
    Ok(LoadedFlow { descriptor: d.clone(), presentation: pres, splitting, state })
}

pub fn load_flow_text(text: &str, cutoff: Weight) -> Result<LoadedFlow> {
    load_flow_descriptor(&FlowDescriptor::parse(text)?, cutoff)
}

// ---------------------------------------------------------------------------
// serialized states

/// Exact text form of a state: the series base, the generators, every
/// nonzero boundary entry and the orbit series.
pub fn serialize_state(state: &FloerState) -> String {
    let base = state.base();
    let join = |v: Vec<String>| v.iter().map(|s| format!(" {s}")).collect::<String>();
    let mut out = String::new();
    out.push_str("[kernel]\n");
    let _ = writeln!(out, "rank {}", base.group.rank());
    let _ = writeln!(out, "torsion{}", join(base.group.torsion_factors().iter().map(|d| d.to_string()).collect()));
    let _ = writeln!(out, "weight{}", join(base.weight.free_values.iter().map(|w| w.to_string()).collect()));
    let _ = writeln!(out, "cutoff {}", state.cutoff());
    out.push_str("[generators]\n");
    let c = state.complex();
    for (n, g) in c.names().iter().zip(c.grades()) {
        let _ = writeln!(out, "{n} {g}");
    }
    out.push_str("[boundary]\n");
    for x in 0..c.len() {
        for y in 0..c.len() {
            let e = c.entry(y, x);
            if !(e.terms().is_empty() && e.cutoff().is_infinite()) {
                let _ = writeln!(out, "{} {} {e}", c.names()[x], c.names()[y]);
            }
        }
    }
    let _ = writeln!(out, "[eta]\n{}", state.eta());
    out
}

pub fn parse_state(text: &str) -> Result<FloerState> {
    let secs = split_sections(text, &["kernel", "generators", "boundary", "eta"])?;
    let mut rank = None;
    let mut torsion = Vec::new();
    let mut weight = Vec::new();
    let mut cutoff = None;
    for (line, text) in body(&secs, "kernel") {
        let toks: Vec<&str> = text.split_whitespace().collect();
        let vals = &toks[1..];
        match toks[0] {
            "rank" if vals.len() == 1 => rank = Some(parse_int(vals[0], *line, "rank")?),
            "torsion" => torsion = vals.iter().map(|v| parse_int(v, *line, "torsion order")).collect::<Result<_>>()?,
            "weight" => {
                weight = vals
                    .iter()
                    .map(|v| parse_weight(v).ok_or_else(|| perr(*line, format!("bad rational {v:?}"))))
                    .collect::<Result<_>>()?
            }
            "cutoff" if vals.len() == 1 => {
                cutoff = Some(parse_weight(vals[0]).ok_or_else(|| perr(*line, format!("bad cutoff {:?}", vals[0])))?)
            }
            _ => return Err(perr(*line, format!("unexpected kernel entry {text:?}"))),
        }
    }
    let rank = rank.ok_or_else(|| perr(0, "[kernel] needs a rank"))?;
    let cutoff = cutoff.ok_or_else(|| perr(0, "[kernel] needs a cutoff"))?;
    let group = GradingGroup::new(usize::try_from(rank).map_err(|_| Error::Validation("negative rank".into()))?, torsion)?;
    let base = SeriesBase::new(group, WeightHom::new(weight))?;
    let split = Arc::new(character_split(&base)?);
    let symbols = Symbols::literal(&base);
    let gens = parse_generators(body(&secs, "generators"), None)?;
    let mut complex =
        GradedComplex::<BigRational>::new(Grading::Z2, &base, &(), gens.iter().map(|g| (g.name.clone(), g.ind)).collect())?;
    for (line, text) in body(&secs, "boundary") {
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(perr(*line, "expected '<source> <target> <series>'"));
        }
        let look = |n: &str| complex.index_of(n).ok_or_else(|| verr(*line, format!("unknown generator {n}")));
        let (x, y) = (look(toks[0])?, look(toks[1])?);
        let e = symbols.series(rest_after(text, 2), *line)?;
        complex.set_entry(y, x, e);
    }
    let eta = match body(&secs, "eta") {
        [] => RatSeries::zero(&base, &()),
        [(line, text)] => symbols.series(text, *line)?,
        [_, (line, _), ..] => return Err(perr(*line, "[eta] holds a single series")),
    };
    FloerState::new(split, complex, eta, cutoff)
}

/// A flow descriptor or a serialized state, told apart by its sections.
pub fn load_state_text(text: &str, cutoff: Weight) -> Result<(FloerState, Symbols)> {
    let serialized = text.lines().any(|l| l.trim() == "[kernel]");
    if serialized {
        let state = parse_state(text)?;
        let symbols = Symbols::literal(state.base());
        Ok((state, symbols))
    } else {
        let loaded = load_flow_text(text, cutoff)?;
        let symbols = loaded.symbols();
        Ok((loaded.state, symbols))
    }
}

// ---------------------------------------------------------------------------
// move scripts

/// One move per line:
///
/// ```text
/// hs1 <x> <y> <chi>
/// hs2 <x> <chi>
/// death <z+> <z->
/// birth <z+> <z-> <position> <grade> <b> | v <name> <series> | w <name> <series>
/// ```
pub fn parse_moves(text: &str, symbols: &Symbols) -> Result<Vec<Move>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").replace('\u{2212}', "-");
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let need = |n: usize| {
            if toks.len() < n {
                Err(perr(line, format!("{} needs more arguments", toks[0])))
            } else {
                Ok(())
            }
        };
        let mv = match toks[0] {
            "hs1" => {
                need(4)?;
                if toks[1] == toks[2] {
                    return Err(perr(line, "hs1 slides one generator over a different one"));
                }
                Move::HandleSlide {
                    x: ident(toks[1], line)?,
                    y: ident(toks[2], line)?,
                    chi: symbols.series(rest_after(content, 3), line)?,
                }
            }
            "hs2" => {
                need(3)?;
                let x = ident(toks[1], line)?;
                Move::HandleSlide { x: x.clone(), y: x, chi: symbols.series(rest_after(content, 2), line)? }
            }
            "death" => {
                if toks.len() != 3 {
                    return Err(perr(line, "expected 'death <z+> <z->'"));
                }
                Move::Death { z_plus: ident(toks[1], line)?, z_minus: ident(toks[2], line)? }
            }
            "birth" => {
                need(6)?;
                let mut parts = content.split('|');
                let head = parts.next().unwrap_or("");
                let position = toks[3]
                    .parse::<usize>()
                    .map_err(|_| perr(line, format!("bad position {:?}", toks[3])))?;
                let grade = parse_int(toks[4], line, "grade")?;
                let b = symbols.series(rest_after(head, 5), line)?;
                let (mut v, mut w) = (Vec::new(), Vec::new());
                for p in parts {
                    let ptoks: Vec<&str> = p.split_whitespace().collect();
                    if ptoks.len() < 3 {
                        return Err(perr(line, "expected 'v <name> <series>' or 'w <name> <series>'"));
                    }
                    let entry = (ident(ptoks[1], line)?, symbols.series(rest_after(p, 2), line)?);
                    match ptoks[0] {
                        "v" => v.push(entry),
                        "w" => w.push(entry),
                        other => return Err(perr(line, format!("expected v or w, found {other:?}"))),
                    }
                }
                Move::Birth { z_plus: ident(toks[1], line)?, z_minus: ident(toks[2], line)?, position, grade, b, v, w }
            }
            other => return Err(perr(line, format!("unknown move {other:?}"))),
        };
        out.push(mv);
    }
    Ok(out)
}

/// Script line for a move, readable by [`parse_moves`] with literal symbols.
pub fn render_move(mv: &Move) -> String {
    match mv {
        Move::HandleSlide { x, y, chi } if x == y => format!("hs2 {x} {chi}"),
        Move::HandleSlide { x, y, chi } => format!("hs1 {x} {y} {chi}"),
        Move::Death { z_plus, z_minus } => format!("death {z_plus} {z_minus}"),
        Move::Birth { z_plus, z_minus, position, grade, b, v, w } => {
            let mut s = format!("birth {z_plus} {z_minus} {position} {grade} {b}");
            for (n, e) in v {
                let _ = write!(s, " | v {n} {e}");
            }
            for (n, e) in w {
                let _ = write!(s, " | w {n} {e}");
            }
            s
        }
    }
}

// ---------------------------------------------------------------------------
// CW complexes

#[derive(Clone, Debug)]
pub struct CellSpec {
    pub name: String,
    pub dim: i64,
    pub line: usize,
}

#[derive(Clone, Debug)]
pub struct CellBoundary {
    pub source: String,
    pub target: String,
    pub poly: Vec<(BigRational, Vec<i64>)>,
    pub line: usize,
}

/// Cellular chains of the universal abelian cover, over `Z[H_1]`.
#[derive(Clone, Debug)]
pub struct CwDescriptor {
    pub group: GroupSpec,
    pub cells: Vec<CellSpec>,
    pub boundary: Vec<CellBoundary>,
}

impl CwDescriptor {
    pub fn parse(text: &str) -> Result<Self> {
        let secs = split_sections(text, &["group", "cells", "boundary"])?;
        if !has_section(&secs, "cells") {
            return Err(perr(0, "missing [cells] section"));
        }
        let group = GroupSpec::parse(body(&secs, "group"))?;
        let cells = body(&secs, "cells")
            .iter()
            .map(|(line, text)| {
                let toks: Vec<&str> = text.split_whitespace().collect();
                let [name, dim] = toks.as_slice() else {
                    return Err(perr(*line, "expected '<cell> <dimension>'"));
                };
                Ok(CellSpec { name: ident(name, *line)?, dim: parse_int(dim, *line, "dimension")?, line: *line })
            })
            .collect::<Result<Vec<_>>>()?;
        let boundary = body(&secs, "boundary")
            .iter()
            .map(|(line, text)| {
                let toks: Vec<&str> = text.split_whitespace().collect();
                if toks.len() < 3 {
                    return Err(perr(*line, "expected '<source> <target> <polynomial>'"));
                }
                Ok(CellBoundary {
                    source: ident(toks[0], *line)?,
                    target: ident(toks[1], *line)?,
                    poly: group.polynomial(rest_after(text, 2), *line)?,
                    line: *line,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CwDescriptor { group, cells, boundary })
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.group.render(&mut out);
        out.push_str("[cells]\n");
        for c in &self.cells {
            let _ = writeln!(out, "{} {}", c.name, c.dim);
        }
        out.push_str("[boundary]\n");
        for b in &self.boundary {
            let _ = writeln!(out, "{} {} {}", b.source, b.target, self.group.render_polynomial(&b.poly));
        }
        out
    }

    /// The cellular complex over `base`, with each `H_1` exponent vector
    /// sent through `map`.
    fn complex_over(
        &self,
        base: &Arc<SeriesBase>,
        map: impl Fn(&[i64]) -> GroupElement,
    ) -> Result<GradedComplex<BigRational>> {
        let mut index = BTreeMap::new();
        for (i, c) in self.cells.iter().enumerate() {
            if c.dim < 0 {
                return Err(verr(c.line, format!("cell {} has negative dimension", c.name)));
            }
            if index.insert(c.name.as_str(), i).is_some() {
                return Err(verr(c.line, format!("cell {} listed twice", c.name)));
            }
        }
        let cells = self.cells.iter().map(|c| (c.name.clone(), c.dim)).collect();
        let mut complex = GradedComplex::<BigRational>::new(Grading::Z, base, &(), cells)?;
        let mut entries: BTreeMap<(usize, usize), Vec<(GroupElement, BigRational)>> = BTreeMap::new();
        for b in &self.boundary {
            let look = |n: &str| index.get(n).copied().ok_or_else(|| verr(b.line, format!("unknown cell {n}")));
            let (x, y) = (look(&b.source)?, look(&b.target)?);
            if self.cells[x].dim != self.cells[y].dim + 1 {
                return Err(verr(b.line, format!("boundary of {} must land one dimension lower", b.source)));
            }
            for (c, e) in &b.poly {
                if !c.is_integer() {
                    return Err(verr(b.line, format!("coefficient {c} is not an integer")));
                }
                entries.entry((y, x)).or_default().push((map(e), c.clone()));
            }
        }
        for ((y, x), terms) in entries {
            complex.set_entry(y, x, Novikov::from_terms(base, &(), terms, Cutoff::Infinite));
        }
        complex.validate_chain()?;
        Ok(complex)
    }
}

/// The CW complex over `Z[H_1]` (weight zero) with its character split.
#[derive(Clone, Debug)]
pub struct CwComplex {
    pub presentation: Presentation,
    pub split: Arc<CharacterSplit>,
    pub complex: GradedComplex<BigRational>,
}

pub fn cw_complex(d: &CwDescriptor) -> Result<CwComplex> {
    let presentation = d.group.presentation()?;
    let base = SeriesBase::new(presentation.group.clone(), WeightHom::zero(presentation.group.rank()))?;
    let split = Arc::new(character_split(&base)?);
    let complex = d.complex_over(&base, |e| presentation.project(e))?;
    Ok(CwComplex { presentation, split, complex })
}

/// Torsion of the cellular complex in each field component; a component in
/// which the complex is not acyclic is 0.
pub fn cw_torsion(d: &CwDescriptor) -> Result<TorsionValue> {
    let cw = cw_complex(d)?;
    cw.complex.torsion(&cw.split, Weight::one())
}

/// `I_F` of the flow side against `iota_* tau(M)` pushed into its Novikov
/// ring.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub invariant: TorsionValue,
    pub pushed: TorsionValue,
    pub witness: Option<UnitWitness>,
}

impl Comparison {
    pub fn equal(&self) -> bool {
        self.witness.is_some()
    }
}

/// `iota` sends `H_1` generator names to monomials of the flow group, which
/// must lie in `ker psi`; generators it omits go to the flow generator of
/// the same name.
pub fn corollary_compare(flow: &LoadedFlow, cw: &CwDescriptor, iota: &[(String, String)]) -> Result<Comparison> {
    let kernel = &flow.state.base().group;
    let images = cw
        .group
        .names
        .iter()
        .map(|n| {
            let text = iota.iter().find(|(a, _)| a == n).map_or(n.as_str(), |(_, b)| b.as_str());
            let e = flow
                .descriptor
                .group
                .monomial(text, 0)
                .map_err(|_| Error::Validation(format!("iota({n}) = {text:?} is not a monomial of the flow group")))?;
            let a = flow.presentation.project(&e);
            if !flow.splitting.in_kernel(&a) {
                return Err(Error::Validation(format!("iota({n}) = {text} is not in ker psi")));
            }
            Ok(flow.splitting.project(&a))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(extra) = iota.iter().find(|(a, _)| cw.group.index(a).is_none()) {
        return Err(Error::Validation(format!("iota names {}, which is not an H_1 generator", extra.0)));
    }
    let map = |e: &[i64]| {
        e.iter().zip(&images).fold(kernel.identity(), |acc, (&k, g)| kernel.add(&acc, &kernel.scale(g, k)))
    };
    if let Some(r) = cw.group.relations.iter().find(|r| !map(r).is_identity()) {
        return Err(Error::Validation(format!(
            "iota does not respect the relation {}",
            cw.group.render_monomial(r)
        )));
    }
    let state = &flow.state;
    let pushed_complex = cw.complex_over(state.base(), map)?;
    let pushed = pushed_complex.torsion(state.split(), state.cutoff())?;
    let invariant = state.invariant()?.value;
    let witness = invariant.equal_mod_unit(&pushed, state.cutoff())?;
    Ok(Comparison { invariant, pushed, witness })
}

/// `a=b,c=d` as pairs.
pub fn parse_iota(spec: &str) -> Result<Vec<(String, String)>> {
    spec.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (a, b) = p.split_once('=').ok_or_else(|| perr(0, format!("iota entry {p:?} needs '='")))?;
            Ok((ident(a.trim(), 0)?, b.trim().to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_splitting() {
        let t = split_terms("t^-1 - 2*s + -1/2*g^(1,-2;0) + O(>3)", 1).unwrap();
        let bodies: Vec<_> = t.iter().map(|(n, b)| (*n, b.as_str())).collect();
        assert_eq!(bodies, vec![(false, "t^-1"), (true, "2*s"), (true, "1/2*g^(1,-2;0)"), (false, "O(>3)")]);
        assert!(split_terms("t +", 1).is_err());
        assert!(split_terms("(t", 1).is_err());
    }

    #[test]
    fn monomials_render_and_parse() {
        let g = GroupSpec { names: vec!["t".into(), "s".into()], relations: vec![] };
        let e = g.monomial("t^2*s^-1*t", 4).unwrap();
        assert_eq!(e, vec![3, -1]);
        assert_eq!(g.render_monomial(&e), "t^3*s^-1");
        assert_eq!(g.monomial("1", 4).unwrap(), vec![0, 0]);
        assert!(matches!(g.monomial("u", 4), Err(Error::Parse { line: 4, .. })));
        assert!(g.monomial("2*t", 4).is_err());
        let p = g.polynomial("t - 1 + 3*s^2", 1).unwrap();
        assert_eq!(g.render_polynomial(&p), "t - 1 + 3*s^2");
    }
}
