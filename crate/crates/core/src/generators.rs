//! Sized, seeded generators for argument values.
//!
//! Every value is drawn from a [`GenContext`], which owns the random source
//! and the current size. Replaying the same seed, size and draw sequence
//! reproduces the same values.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::{ArgSpec, SchemaModel, TypeKind, TypeRef, BUILTIN_SCALARS};
use crate::value::ArgValue;

/// Input objects nested deeper than this are cut off.
pub const MAX_INPUT_DEPTH: usize = 8;
/// Int values are drawn from `[-size * INT_SCALE, size * INT_SCALE]`.
pub const INT_SCALE: i64 = 1000;
/// Length of generated `ID` tokens, independent of size.
pub const ID_LENGTH: usize = 8;
/// Probability that an optional argument or input field is generated.
pub const OPTIONAL_PROBABILITY: f64 = 0.5;

const ALNUM: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("unknown scalar type `{0}`")]
    UnknownScalar(String),
    #[error("input object nesting exceeds depth {MAX_INPUT_DEPTH} at `{0}`")]
    RecursionLimit(String),
    #[error("unknown input type `{0}`")]
    UnknownInputType(String),
    #[error("invalid generator recipe `{pattern}`: {reason}")]
    InvalidRecipe { pattern: String, reason: String },
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CharsetMode {
    /// `[a-zA-Z0-9]`
    #[default]
    #[serde(alias = "alnum")]
    Alphanumeric,
    /// Any code point in `0..=255`.
    FullByte,
}

impl std::str::FromStr for CharsetMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "alnum" | "alphanumeric" => Ok(CharsetMode::Alphanumeric),
            "full-byte" | "full_byte" | "fullbyte" => Ok(CharsetMode::FullByte),
            other => Err(format!(
                "unknown charset `{other}` (expected alnum or full-byte)"
            )),
        }
    }
}

/// Random source plus the size parameter.
#[derive(Debug, Clone)]
pub struct GenContext {
    rng: ChaCha8Rng,
    size: u32,
    charset: CharsetMode,
    strict: bool,
}

impl GenContext {
    pub fn new(seed: u64, size: u32, charset: CharsetMode) -> Self {
        GenContext {
            rng: ChaCha8Rng::seed_from_u64(seed),
            size,
            charset,
            strict: false,
        }
    }

    /// A context for test case `index` of a run. Each index gets its own
    /// ChaCha stream, so test cases do not depend on each other's draws.
    pub fn for_test(seed: u64, index: u64, size: u32, charset: CharsetMode) -> Self {
        let mut ctx = GenContext::new(seed, size, charset);
        ctx.rng.set_stream(index);
        ctx
    }

    /// Reject custom scalars instead of generating strings for them.
    pub fn with_strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn set_size(&mut self, size: u32) {
        self.size = size;
    }

    pub fn charset(&self) -> CharsetMode {
        self.charset
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn char(&mut self) -> char {
        match self.charset {
            CharsetMode::Alphanumeric => ALNUM[self.rng.gen_range(0..ALNUM.len())] as char,
            CharsetMode::FullByte => char::from(self.rng.gen::<u8>()),
        }
    }

    pub fn string(&mut self) -> String {
        let len = self.rng.gen_range(0..=self.size as usize);
        (0..len).map(|_| self.char()).collect()
    }

    pub fn alnum(&mut self, len: usize) -> String {
        (0..len)
            .map(|_| ALNUM[self.rng.gen_range(0..ALNUM.len())] as char)
            .collect()
    }

    pub fn int(&mut self) -> i64 {
        let bound = (self.size as i64 * INT_SCALE).min(i32::MAX as i64);
        self.rng.gen_range(-bound..=bound)
    }

    pub fn float(&mut self) -> f64 {
        let bound = self.size as f64 * INT_SCALE as f64;
        if bound == 0.0 {
            0.0
        } else {
            self.rng.gen_range(-bound..=bound)
        }
    }
}

/// Draw a scalar of the named type.
pub fn gen_scalar(kind: &str, ctx: &mut GenContext) -> Result<ArgValue, GenError> {
    Ok(match kind {
        "String" => ArgValue::String(ctx.string()),
        "Int" => ArgValue::Int(ctx.int()),
        "Float" => ArgValue::Float(ctx.float()),
        "Boolean" => ArgValue::Boolean(ctx.rng.gen()),
        "ID" => ArgValue::String(ctx.alnum(ID_LENGTH)),
        other if ctx.strict => return Err(GenError::UnknownScalar(other.to_owned())),
        _ => ArgValue::String(ctx.string()),
    })
}

pub type GeneratorFn = dyn Fn(&mut GenContext) -> ArgValue + Send + Sync;

/// A user-supplied generator.
#[derive(Clone)]
pub struct CustomGenerator(Arc<GeneratorFn>);

impl CustomGenerator {
    pub fn new(f: impl Fn(&mut GenContext) -> ArgValue + Send + Sync + 'static) -> Self {
        CustomGenerator(Arc::new(f))
    }

    pub fn generate(&self, ctx: &mut GenContext) -> ArgValue {
        (self.0)(ctx)
    }
}

impl fmt::Debug for CustomGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomGenerator(..)")
    }
}

impl From<Recipe> for CustomGenerator {
    fn from(recipe: Recipe) -> Self {
        CustomGenerator::new(move |ctx| recipe.generate(ctx))
    }
}

/// Custom generators keyed by type name or by `Object.field.arg` path.
///
/// Lookup order: field path, then type name, then the built-ins.
#[derive(Debug, Clone, Default)]
pub struct GeneratorRegistry {
    by_type_name: HashMap<String, CustomGenerator>,
    by_field_path: HashMap<String, CustomGenerator>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryConfig {
    #[serde(default)]
    types: HashMap<String, String>,
    #[serde(default)]
    fields: HashMap<String, String>,
}

impl GeneratorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_type(
        &mut self,
        type_name: impl Into<String>,
        generator: impl Into<CustomGenerator>,
    ) {
        self.by_type_name.insert(type_name.into(), generator.into());
    }

    pub fn register_field(
        &mut self,
        field_path: impl Into<String>,
        generator: impl Into<CustomGenerator>,
    ) {
        self.by_field_path
            .insert(field_path.into(), generator.into());
    }

    pub fn for_field(&self, field_path: &str) -> Option<&CustomGenerator> {
        self.by_field_path.get(field_path)
    }

    pub fn for_type(&self, type_name: &str) -> Option<&CustomGenerator> {
        self.by_type_name.get(type_name)
    }

    pub fn is_empty(&self) -> bool {
        self.by_type_name.is_empty() && self.by_field_path.is_empty()
    }

    /// Load recipes from TOML:
    ///
    /// ```toml
    /// [types]
    /// GitlabID = "gid://gitlab/<choice:Issue|Project|Group>/<int>"
    ///
    /// [fields]
    /// "Query.user.id" = "<choice:201|202>"
    /// ```
    pub fn from_toml(text: &str) -> Result<Self, GenError> {
        let config: RegistryConfig =
            toml::from_str(text).map_err(|e| GenError::InvalidConfig(e.to_string()))?;
        let mut registry = GeneratorRegistry::new();
        for (name, pattern) in config.types {
            registry.register_type(name, Recipe::parse(&pattern)?);
        }
        for (path, pattern) in config.fields {
            registry.register_field(path, Recipe::parse(&pattern)?);
        }
        Ok(registry)
    }

    /// Entries of `other` replace entries with the same key.
    pub fn extend(&mut self, other: GeneratorRegistry) {
        self.by_type_name.extend(other.by_type_name);
        self.by_field_path.extend(other.by_field_path);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Literal(String),
    Int,
    Choice(Vec<String>),
    Alnum(usize),
}

/// A string template with random placeholders: `<int>`, `<choice:a|b|c>`
/// and `<alnum:n>`.
///
/// A pattern that is exactly `<int>` produces an Int value; everything else
/// produces a String.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recipe {
    segments: Vec<Segment>,
}

impl Recipe {
    pub fn parse(pattern: &str) -> Result<Self, GenError> {
        let err = |reason: &str| GenError::InvalidRecipe {
            pattern: pattern.to_owned(),
            reason: reason.to_owned(),
        };
        let mut segments = Vec::new();
        let mut rest = pattern;
        while !rest.is_empty() {
            let Some(open) = rest.find('<') else {
                segments.push(Segment::Literal(rest.to_owned()));
                break;
            };
            if open > 0 {
                segments.push(Segment::Literal(rest[..open].to_owned()));
            }
            let close = rest[open..]
                .find('>')
                .ok_or_else(|| err("unterminated placeholder"))?
                + open;
            let body = &rest[open + 1..close];
            let segment = match body.split_once(':') {
                None if body == "int" => Segment::Int,
                Some(("choice", options)) => {
                    let options: Vec<String> = options.split('|').map(str::to_owned).collect();
                    if options.iter().any(String::is_empty) {
                        return Err(err("empty choice"));
                    }
                    Segment::Choice(options)
                }
                Some(("alnum", n)) => {
                    Segment::Alnum(n.parse().map_err(|_| err("bad alnum length"))?)
                }
                _ => return Err(err("unknown placeholder")),
            };
            segments.push(segment);
            rest = &rest[close + 1..];
        }
        Ok(Recipe { segments })
    }

    pub fn generate(&self, ctx: &mut GenContext) -> ArgValue {
        let int_bound = ctx.size.max(1) as i64 * INT_SCALE;
        if let [Segment::Int] = self.segments.as_slice() {
            return ArgValue::Int(ctx.rng.gen_range(0..=int_bound));
        }
        let mut out = String::new();
        for segment in &self.segments {
            match segment {
                Segment::Literal(s) => out.push_str(s),
                Segment::Int => out.push_str(&ctx.rng.gen_range(0..=int_bound).to_string()),
                Segment::Choice(options) => {
                    out.push_str(options.choose(&mut ctx.rng).expect("non-empty choice"))
                }
                Segment::Alnum(n) => out.push_str(&ctx.alnum(*n)),
            }
        }
        ArgValue::String(out)
    }
}

/// Generate a value for `arg` of the field at `field_path`
/// (`Object.field`).
///
/// Required arguments always get a value; optional ones with probability
/// [`OPTIONAL_PROBABILITY`].
pub fn gen_argument(
    arg: &ArgSpec,
    schema: &SchemaModel,
    registry: &GeneratorRegistry,
    ctx: &mut GenContext,
    field_path: &str,
) -> Result<Option<ArgValue>, GenError> {
    if !arg.required && !ctx.chance(OPTIONAL_PROBABILITY) {
        return Ok(None);
    }
    let path = format!("{field_path}.{}", arg.name);
    gen_input(&arg.ty, schema, registry, ctx, &path, 0).map(Some)
}

fn gen_input(
    ty: &TypeRef,
    schema: &SchemaModel,
    registry: &GeneratorRegistry,
    ctx: &mut GenContext,
    path: &str,
    depth: usize,
) -> Result<ArgValue, GenError> {
    if let Some(custom) = registry.for_field(path) {
        return Ok(custom.generate(ctx));
    }
    gen_typed(ty, schema, registry, ctx, path, depth)
}

fn gen_typed(
    ty: &TypeRef,
    schema: &SchemaModel,
    registry: &GeneratorRegistry,
    ctx: &mut GenContext,
    path: &str,
    depth: usize,
) -> Result<ArgValue, GenError> {
    match ty.kind {
        TypeKind::NonNull => gen_typed(inner(ty), schema, registry, ctx, path, depth),
        TypeKind::List => {
            let len = ctx.rng.gen_range(0..=ctx.size as usize / 4 + 1);
            let items = (0..len)
                .map(|_| gen_typed(inner(ty), schema, registry, ctx, path, depth))
                .collect::<Result<_, _>>()?;
            Ok(ArgValue::List(items))
        }
        _ => {
            let name = ty.type_name();
            if let Some(custom) = registry.for_type(name) {
                return Ok(custom.generate(ctx));
            }
            if let Some(values) = schema.enums.get(name) {
                return Ok(values
                    .choose(&mut ctx.rng)
                    .map(|v| ArgValue::Enum(v.clone()))
                    .unwrap_or(ArgValue::Null));
            }
            if let Some(fields) = schema.input_objects.get(name) {
                return gen_input_object(fields, schema, registry, ctx, path, depth + 1);
            }
            if schema.scalars.contains(name) || BUILTIN_SCALARS.contains(&name) {
                return gen_scalar(name, ctx);
            }
            Err(GenError::UnknownInputType(name.to_owned()))
        }
    }
}

fn gen_input_object(
    fields: &[ArgSpec],
    schema: &SchemaModel,
    registry: &GeneratorRegistry,
    ctx: &mut GenContext,
    path: &str,
    depth: usize,
) -> Result<ArgValue, GenError> {
    if depth > MAX_INPUT_DEPTH {
        return Err(GenError::RecursionLimit(path.to_owned()));
    }
    let mut out = Vec::new();
    for field in fields {
        // Past the cut-off only required fields are generated, and a
        // required cycle then runs into the depth error above.
        let include =
            field.required || (depth < MAX_INPUT_DEPTH && ctx.chance(OPTIONAL_PROBABILITY));
        if include {
            let sub = format!("{path}.{}", field.name);
            out.push((
                field.name.clone(),
                gen_input(&field.ty, schema, registry, ctx, &sub, depth)?,
            ));
        }
    }
    Ok(ArgValue::Object(out))
}

fn inner(ty: &TypeRef) -> &TypeRef {
    ty.of_type.as_deref().expect("wrapper type without of_type")
}
