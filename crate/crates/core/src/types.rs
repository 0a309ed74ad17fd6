//! Value and type machinery shared by every layer: declared types, flattened
//! state layouts, and the scalar slot representation that programs execute on.
//!
//! Compound state variables (records, arrays) are flattened into a fixed
//! vector of scalar slots at link time. Paths compile down to slot offsets,
//! which keeps stepping cheap and makes state equality/hashing trivial.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Index of an enum declaration in a [`TypeTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EnumId(pub u32);

/// Index of a record declaration in a [`TypeTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecordId(pub u32);

/// A value type as declared in documents or inferred for expressions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ty {
    Bool,
    Int,
    Real,
    Str,
    Enum(EnumId),
    Record(RecordId),
    Array(Box<Ty>, usize),
    /// Runtime-checked type of `__input` and its projections.
    Any,
}

impl Ty {
    pub fn is_numeric(&self) -> bool {
        matches!(self, Ty::Int | Ty::Real | Ty::Any)
    }

    pub fn is_scalar(&self) -> bool {
        !matches!(self, Ty::Record(_) | Ty::Array(_, _))
    }
}

#[derive(Debug, Clone)]
pub struct EnumDecl {
    pub name: String,
    pub symbols: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RecordDecl {
    pub name: String,
    pub fields: Vec<(String, Ty)>,
}

/// All named types known to a linked project: environment enum/record
/// declarations plus one implicit enum per skill for its response symbols.
#[derive(Debug, Clone, Default)]
pub struct TypeTable {
    pub enums: Vec<EnumDecl>,
    pub records: Vec<RecordDecl>,
    by_name: BTreeMap<String, Ty>,
    symbol_index: BTreeMap<String, (EnumId, u32)>,
}

impl TypeTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_enum(&mut self, decl: EnumDecl) -> Result<EnumId, String> {
        if self.by_name.contains_key(&decl.name) {
            return Err(format!("duplicate type name `{}`", decl.name));
        }
        let id = EnumId(self.enums.len() as u32);
        for (i, sym) in decl.symbols.iter().enumerate() {
            if self.symbol_index.contains_key(sym) {
                return Err(format!("enum symbol `{sym}` declared more than once"));
            }
            self.symbol_index.insert(sym.clone(), (id, i as u32));
        }
        self.by_name.insert(decl.name.clone(), Ty::Enum(id));
        self.enums.push(decl);
        Ok(id)
    }

    /// Registers an enum that is not part of the document-level namespace
    /// (used for per-skill response sets, which may reuse symbol names).
    pub fn add_anonymous_enum(&mut self, name: String, symbols: Vec<String>) -> EnumId {
        let id = EnumId(self.enums.len() as u32);
        self.enums.push(EnumDecl { name, symbols });
        id
    }

    pub fn add_record(&mut self, decl: RecordDecl) -> Result<RecordId, String> {
        if self.by_name.contains_key(&decl.name) {
            return Err(format!("duplicate type name `{}`", decl.name));
        }
        let id = RecordId(self.records.len() as u32);
        self.by_name.insert(decl.name.clone(), Ty::Record(id));
        self.records.push(decl);
        Ok(id)
    }

    pub fn lookup(&self, name: &str) -> Option<&Ty> {
        self.by_name.get(name)
    }

    /// Resolves a declared global enum symbol (environment namespace only).
    pub fn lookup_symbol(&self, sym: &str) -> Option<(EnumId, u32)> {
        self.symbol_index.get(sym).copied()
    }

    pub fn enum_decl(&self, id: EnumId) -> &EnumDecl {
        &self.enums[id.0 as usize]
    }

    pub fn record_decl(&self, id: RecordId) -> &RecordDecl {
        &self.records[id.0 as usize]
    }

    pub fn symbol_name(&self, id: EnumId, idx: u32) -> &str {
        &self.enums[id.0 as usize].symbols[idx as usize]
    }

    /// Parses a type name as written in documents: a primitive name, a
    /// declared enum/record name, or `elem[N]` for fixed-length arrays.
    pub fn parse_type_name(&self, text: &str) -> Result<Ty, String> {
        let text = text.trim();
        if let Some(open) = text.find('[') {
            if !text.ends_with(']') {
                return Err(format!("malformed array type `{text}`"));
            }
            let elem = self.parse_type_name(&text[..open])?;
            let len_str = &text[open + 1..text.len() - 1];
            let len: usize = len_str
                .trim()
                .parse()
                .map_err(|_| format!("bad array length in `{text}`"))?;
            if len == 0 {
                return Err(format!("array length must be >= 1 in `{text}`"));
            }
            return Ok(Ty::Array(Box::new(elem), len));
        }
        match text {
            "bool" => Ok(Ty::Bool),
            "int" => Ok(Ty::Int),
            "real" | "float" | "double" => Ok(Ty::Real),
            "string" => Ok(Ty::Str),
            other => self
                .lookup(other)
                .cloned()
                .ok_or_else(|| format!("unknown type `{other}`")),
        }
    }

    /// Number of scalar slots a value of this type occupies when flattened.
    pub fn flat_size(&self, ty: &Ty) -> usize {
        match ty {
            Ty::Bool | Ty::Int | Ty::Real | Ty::Str | Ty::Enum(_) | Ty::Any => 1,
            Ty::Record(id) => self
                .record_decl(*id)
                .fields
                .iter()
                .map(|(_, t)| self.flat_size(t))
                .sum(),
            Ty::Array(elem, n) => self.flat_size(elem) * n,
        }
    }

    /// Offset of `field` within a flattened record, with its type.
    pub fn field_offset(&self, rec: RecordId, field: &str) -> Option<(usize, Ty)> {
        let mut off = 0;
        for (name, ty) in &self.record_decl(rec).fields {
            if name == field {
                return Some((off, ty.clone()));
            }
            off += self.flat_size(ty);
        }
        None
    }

    pub fn default_slots(&self, ty: &Ty, out: &mut Vec<Scalar>) {
        match ty {
            Ty::Bool => out.push(Scalar::Bool(false)),
            Ty::Int => out.push(Scalar::Int(0)),
            Ty::Real => out.push(Scalar::Real(0.0)),
            Ty::Str => out.push(Scalar::Str(Arc::from(""))),
            Ty::Enum(_) => out.push(Scalar::Enum(0)),
            Ty::Any => out.push(Scalar::Int(0)),
            Ty::Record(id) => {
                let decl = self.record_decl(*id).clone();
                for (_, fty) in &decl.fields {
                    self.default_slots(fty, out);
                }
            }
            Ty::Array(elem, n) => {
                for _ in 0..*n {
                    self.default_slots(elem, out);
                }
            }
        }
    }

    /// Converts a JSON literal into flattened slots, checked against `ty`.
    /// Enum values are written as their symbol string, records as objects,
    /// arrays as JSON arrays of exact declared length.
    pub fn flatten_json(
        &self,
        ty: &Ty,
        value: &serde_json::Value,
        out: &mut Vec<Scalar>,
    ) -> Result<(), String> {
        use serde_json::Value as J;
        match (ty, value) {
            (Ty::Bool, J::Bool(b)) => out.push(Scalar::Bool(*b)),
            (Ty::Int, J::Number(n)) if n.is_i64() => out.push(Scalar::Int(n.as_i64().unwrap())),
            (Ty::Real, J::Number(n)) => {
                out.push(Scalar::Real(n.as_f64().ok_or("non-finite number")?))
            }
            (Ty::Str, J::String(s)) => out.push(Scalar::Str(Arc::from(s.as_str()))),
            (Ty::Enum(id), J::String(s)) => {
                let decl = self.enum_decl(*id);
                let idx = decl
                    .symbols
                    .iter()
                    .position(|x| x == s)
                    .ok_or_else(|| format!("`{s}` is not a symbol of enum `{}`", decl.name))?;
                out.push(Scalar::Enum(idx as u32));
            }
            (Ty::Record(id), J::Object(map)) => {
                let decl = self.record_decl(*id).clone();
                for (fname, fty) in &decl.fields {
                    let fval = map.get(fname).ok_or_else(|| {
                        format!("missing field `{fname}` of record `{}`", decl.name)
                    })?;
                    self.flatten_json(fty, fval, out)?;
                }
                for key in map.keys() {
                    if !key.starts_with('_') && !decl.fields.iter().any(|(f, _)| f == key) {
                        return Err(format!("unknown field `{key}` of record `{}`", decl.name));
                    }
                }
            }
            (Ty::Array(elem, n), J::Array(items)) => {
                if items.len() != *n {
                    return Err(format!("array expects {n} elements, got {}", items.len()));
                }
                for item in items {
                    self.flatten_json(elem, item, out)?;
                }
            }
            (ty, got) => return Err(format!("expected {}, got {got}", self.display_ty(ty))),
        }
        Ok(())
    }

    pub fn display_ty(&self, ty: &Ty) -> String {
        match ty {
            Ty::Bool => "bool".into(),
            Ty::Int => "int".into(),
            Ty::Real => "real".into(),
            Ty::Str => "string".into(),
            Ty::Any => "any".into(),
            Ty::Enum(id) => self.enum_decl(*id).name.clone(),
            Ty::Record(id) => self.record_decl(*id).name.clone(),
            Ty::Array(elem, n) => format!("{}[{n}]", self.display_ty(elem)),
        }
    }

    /// Renders flattened slots back into a JSON literal of type `ty`.
    pub fn slots_to_json(&self, ty: &Ty, slots: &[Scalar], pos: &mut usize) -> serde_json::Value {
        use serde_json::Value as J;
        match ty {
            Ty::Bool | Ty::Int | Ty::Real | Ty::Str | Ty::Any => {
                let s = &slots[*pos];
                *pos += 1;
                s.to_json()
            }
            Ty::Enum(id) => {
                let s = &slots[*pos];
                *pos += 1;
                match s {
                    Scalar::Enum(i) => J::String(self.symbol_name(*id, *i).to_string()),
                    other => other.to_json(),
                }
            }
            Ty::Record(id) => {
                let decl = self.record_decl(*id).clone();
                let mut map = serde_json::Map::new();
                for (fname, fty) in &decl.fields {
                    map.insert(fname.clone(), self.slots_to_json(fty, slots, pos));
                }
                J::Object(map)
            }
            Ty::Array(elem, n) => {
                J::Array((0..*n).map(|_| self.slots_to_json(elem, slots, pos)).collect())
            }
        }
    }
}

/// One flattened scalar cell. Strings are refcounted so state clones stay cheap.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Bool(bool),
    Int(i64),
    Real(f64),
    Str(Arc<str>),
    Enum(u32),
}

impl Scalar {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Scalar::Bool(_) => "bool",
            Scalar::Int(_) => "int",
            Scalar::Real(_) => "real",
            Scalar::Str(_) => "string",
            Scalar::Enum(_) => "enum",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::Value as J;
        match self {
            Scalar::Bool(b) => J::Bool(*b),
            Scalar::Int(i) => J::Number((*i).into()),
            Scalar::Real(r) => serde_json::Number::from_f64(*r)
                .map(J::Number)
                .unwrap_or(J::Null),
            Scalar::Str(s) => J::String(s.to_string()),
            Scalar::Enum(i) => J::Number((*i as i64).into()),
        }
    }

    /// Canonical byte encoding used for hashing and enumeration dedup.
    pub fn canon_bytes(&self, out: &mut Vec<u8>) {
        match self {
            Scalar::Bool(b) => {
                out.push(0);
                out.push(*b as u8);
            }
            Scalar::Int(i) => {
                out.push(1);
                out.extend_from_slice(&i.to_le_bytes());
            }
            Scalar::Real(r) => {
                out.push(2);
                // normalize -0.0 so it keys identically to 0.0
                let bits = if *r == 0.0 { 0u64 } else { r.to_bits() };
                out.extend_from_slice(&bits.to_le_bytes());
            }
            Scalar::Str(s) => {
                out.push(3);
                out.extend_from_slice(&(s.len() as u64).to_le_bytes());
                out.extend_from_slice(s.as_bytes());
            }
            Scalar::Enum(i) => {
                out.push(4);
                out.extend_from_slice(&i.to_le_bytes());
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Int(i) => write!(f, "{i}"),
            Scalar::Real(r) => write!(f, "{r}"),
            Scalar::Str(s) => write!(f, "{s:?}"),
            Scalar::Enum(i) => write!(f, "#{i}"),
        }
    }
}

/// Flattened layout of the declared state variables.
#[derive(Debug, Clone, Default)]
pub struct StateLayout {
    pub vars: Vec<StateVarSlot>,
    pub total_slots: usize,
    by_name: BTreeMap<String, usize>,
}

#[derive(Debug, Clone)]
pub struct StateVarSlot {
    pub name: String,
    pub ty: Ty,
    pub offset: usize,
    pub size: usize,
}

impl StateLayout {
    pub fn build(types: &TypeTable, vars: &[(String, Ty)]) -> Result<Self, String> {
        let mut layout = StateLayout::default();
        let mut offset = 0;
        for (name, ty) in vars {
            if layout.by_name.contains_key(name) {
                return Err(format!("duplicate state variable `{name}`"));
            }
            let size = types.flat_size(ty);
            layout.by_name.insert(name.clone(), layout.vars.len());
            layout.vars.push(StateVarSlot {
                name: name.clone(),
                ty: ty.clone(),
                offset,
                size,
            });
            offset += size;
        }
        layout.total_slots = offset;
        Ok(layout)
    }

    pub fn var(&self, name: &str) -> Option<&StateVarSlot> {
        self.by_name.get(name).map(|&i| &self.vars[i])
    }

    pub fn default_state(&self, types: &TypeTable) -> Vec<Scalar> {
        let mut slots = Vec::with_capacity(self.total_slots);
        for v in &self.vars {
            types.default_slots(&v.ty, &mut slots);
        }
        slots
    }
}

/// A POMDP state: flattened variable slots plus the mask of one-time
/// special-state rewards already collected.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub slots: Vec<Scalar>,
    pub collected: u64,
}

impl State {
    pub fn canon_bytes(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.collected.to_le_bytes());
        for s in &self.slots {
            s.canon_bytes(out);
        }
    }

    pub fn canon_key(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.slots.len() * 9 + 8);
        self.canon_bytes(&mut out);
        out
    }
}

impl Eq for State {}

impl std::hash::Hash for State {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        state.write_u64(self.collected);
        for s in &self.slots {
            match s {
                Scalar::Bool(b) => state.write_u8(*b as u8),
                Scalar::Int(i) => state.write_i64(*i),
                Scalar::Real(r) => {
                    state.write_u64(if *r == 0.0 { 0 } else { r.to_bits() })
                }
                Scalar::Str(s) => state.write(s.as_bytes()),
                Scalar::Enum(i) => state.write_u32(*i),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_with_location() -> (TypeTable, RecordId) {
        let mut t = TypeTable::new();
        let rec = t
            .add_record(RecordDecl {
                name: "tLocation".into(),
                fields: vec![
                    ("discrete".into(), Ty::Int),
                    ("x".into(), Ty::Real),
                    ("y".into(), Ty::Real),
                ],
            })
            .unwrap();
        (t, rec)
    }

    #[test]
    fn flat_size_counts_nested_slots() {
        let (t, rec) = table_with_location();
        assert_eq!(t.flat_size(&Ty::Record(rec)), 3);
        assert_eq!(t.flat_size(&Ty::Array(Box::new(Ty::Record(rec)), 4)), 12);
    }

    #[test]
    fn parse_type_names() {
        let (t, _) = table_with_location();
        assert_eq!(t.parse_type_name("int").unwrap(), Ty::Int);
        assert!(matches!(t.parse_type_name("tLocation").unwrap(), Ty::Record(_)));
        assert_eq!(
            t.parse_type_name("bool[9]").unwrap(),
            Ty::Array(Box::new(Ty::Bool), 9)
        );
        assert!(t.parse_type_name("bool[0]").is_err());
        assert!(t.parse_type_name("tMissing").is_err());
    }

    #[test]
    fn flatten_json_roundtrip() {
        let (t, rec) = table_with_location();
        let ty = Ty::Record(rec);
        let json = serde_json::json!({"discrete": 2, "x": 1.5, "y": -0.5});
        let mut slots = Vec::new();
        t.flatten_json(&ty, &json, &mut slots).unwrap();
        assert_eq!(
            slots,
            vec![Scalar::Int(2), Scalar::Real(1.5), Scalar::Real(-0.5)]
        );
        let mut pos = 0;
        let back = t.slots_to_json(&ty, &slots, &mut pos);
        assert_eq!(back, json);
    }

    #[test]
    fn flatten_json_rejects_mismatch() {
        let (t, rec) = table_with_location();
        let mut out = Vec::new();
        let err = t
            .flatten_json(&Ty::Record(rec), &serde_json::json!({"discrete": 2.5}), &mut out)
            .unwrap_err();
        assert!(err.contains("expected") || err.contains("missing"), "{err}");
    }

    #[test]
    fn field_offsets() {
        let (t, rec) = table_with_location();
        assert_eq!(t.field_offset(rec, "discrete").unwrap().0, 0);
        assert_eq!(t.field_offset(rec, "y").unwrap().0, 2);
        assert!(t.field_offset(rec, "z").is_none());
    }

    #[test]
    fn layout_offsets_and_duplicates() {
        let (t, rec) = table_with_location();
        let layout = StateLayout::build(
            &t,
            &[
                ("robotLocation".into(), Ty::Record(rec)),
                ("flag".into(), Ty::Bool),
            ],
        )
        .unwrap();
        assert_eq!(layout.total_slots, 4);
        assert_eq!(layout.var("flag").unwrap().offset, 3);
        assert!(StateLayout::build(
            &t,
            &[("a".into(), Ty::Int), ("a".into(), Ty::Int)]
        )
        .is_err());
    }
}
