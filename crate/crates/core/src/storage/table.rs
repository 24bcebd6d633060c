use std::collections::{BTreeSet, HashMap};

use crate::digitizer::{pad_plan, Codec, CodecScope, OrderPolicy};
use crate::qram::FileView;
use crate::query::{binder, BoolExpr};
use crate::value::Value;

use super::schema::{is_identifier, Schema};
use super::StorageError;

/// File id of a table's main file in traces and codec headers.
pub const MAIN_FILE_ID: &str = "main";

/// A non-padding record of the main file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Record<'a> {
    pub address: usize,
    pub values: &'a [Value],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxEntry {
    pub value: Value,
    /// 1-based address of the record in the main file.
    pub address: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxFile {
    property: String,
    index: usize,
    entries: Vec<AuxEntry>,
    codec: Codec,
}

impl AuxFile {
    fn new(
        property: &str,
        index: usize,
        entries: Vec<AuxEntry>,
        policy: OrderPolicy,
    ) -> Result<AuxFile, StorageError> {
        let mut aux = AuxFile {
            property: property.to_string(),
            index,
            entries,
            codec: Codec::empty(CodecScope::new("", property), policy),
        };
        aux.rebuild_codec(policy)?;
        Ok(aux)
    }

    fn rebuild_codec(&mut self, policy: OrderPolicy) -> Result<(), StorageError> {
        let values: Vec<Value> = self.entries.iter().map(|e| e.value.clone()).collect();
        self.codec = Codec::build(
            CodecScope::new(self.file_id(), &self.property),
            &values,
            policy,
        )?;
        Ok(())
    }

    pub fn property(&self) -> &str {
        &self.property
    }

    /// 1-based position among the property's auxiliary files.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn file_id(&self) -> String {
        format!("{}.{}", self.property, self.index)
    }

    pub fn entries(&self) -> &[AuxEntry] {
        &self.entries
    }

    pub fn codec(&self) -> &Codec {
        &self.codec
    }

    pub fn real_count(&self) -> usize {
        self.entries.len()
    }

    pub fn padded_size(&self) -> usize {
        pad_plan(self.entries.len()).padded_size
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.codec.encode(v).is_some()
    }

    /// Entry stored at 1-based cell `cell`; `None` for padding.
    pub fn entry_at(&self, cell: usize) -> Option<&AuxEntry> {
        cell.checked_sub(1).and_then(|i| self.entries.get(i))
    }

    /// Padded cell view: real entries first, padding after.
    pub fn view(&self) -> FileView<'_> {
        let mut cells: Vec<Option<&Value>> = self.entries.iter().map(|e| Some(&e.value)).collect();
        cells.resize(self.padded_size(), None);
        FileView {
            file_id: self.file_id(),
            cells,
            codec: &self.codec,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    name: String,
    schema: Schema,
    cells: Vec<Option<Vec<Value>>>,
    key_codec: Codec,
    /// Indexed by property position; empty for properties without aux files.
    aux: Vec<Vec<AuxFile>>,
    policy: OrderPolicy,
}

impl Table {
    pub fn create(name: &str, schema: Schema, policy: OrderPolicy) -> Result<Table, StorageError> {
        if !is_identifier(name) {
            return Err(StorageError::Schema(format!("bad table name `{name}`")));
        }
        let key_name = schema.key().name.clone();
        let aux = vec![Vec::new(); schema.len()];
        Ok(Table {
            name: name.to_string(),
            key_codec: Codec::empty(CodecScope::new(MAIN_FILE_ID, key_name), policy),
            schema,
            cells: vec![None],
            aux,
            policy,
        })
    }

    pub(crate) fn from_parts(
        name: String,
        schema: Schema,
        cells: Vec<Option<Vec<Value>>>,
        aux_entries: Vec<Vec<Vec<AuxEntry>>>,
        policy: OrderPolicy,
    ) -> Result<Table, StorageError> {
        let mut table = Table::create(&name, schema, policy)?;
        table.cells = cells;
        for (pos, files) in aux_entries.into_iter().enumerate() {
            let prop = table.schema.properties()[pos].name.clone();
            table.aux[pos] = files
                .into_iter()
                .enumerate()
                .map(|(k, entries)| AuxFile::new(&prop, k + 1, entries, policy))
                .collect::<Result<_, _>>()?;
        }
        table.rebuild_key_codec()?;
        table.check_invariants().map_err(StorageError::Corrupt)?;
        Ok(table)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn policy(&self) -> OrderPolicy {
        self.policy
    }

    /// Re-digitizes every file under a different policy.
    pub fn set_policy(&mut self, policy: OrderPolicy) -> Result<(), StorageError> {
        self.policy = policy;
        self.rebuild_key_codec()?;
        for files in &mut self.aux {
            for f in files {
                f.rebuild_codec(policy)?;
            }
        }
        Ok(())
    }

    /// Padded main-file size, always a power of four.
    pub fn padded_size(&self) -> usize {
        self.cells.len()
    }

    pub fn real_count(&self) -> usize {
        self.key_codec.count()
    }

    pub fn key_codec(&self) -> &Codec {
        &self.key_codec
    }

    pub fn is_padding(&self, address: usize) -> bool {
        self.record(address).is_none()
    }

    pub fn record(&self, address: usize) -> Option<Record<'_>> {
        let cell = self.cells.get(address.checked_sub(1)?)?;
        cell.as_ref().map(|values| Record { address, values })
    }

    pub fn records(&self) -> impl Iterator<Item = Record<'_>> {
        self.cells.iter().enumerate().filter_map(|(i, c)| {
            c.as_ref().map(|values| Record {
                address: i + 1,
                values,
            })
        })
    }

    /// Addresses of every non-padding record.
    pub fn real_addresses(&self) -> BTreeSet<usize> {
        self.records().map(|r| r.address).collect()
    }

    pub(crate) fn raw_cells(&self) -> &[Option<Vec<Value>>] {
        &self.cells
    }

    /// Auxiliary files of `property` in index order; empty when it has none.
    pub fn aux_files(&self, property: &str) -> &[AuxFile] {
        self.schema
            .position(property)
            .map(|p| self.aux[p].as_slice())
            .unwrap_or(&[])
    }

    pub fn main_view(&self) -> FileView<'_> {
        let key = self.schema.key_index();
        FileView {
            file_id: MAIN_FILE_ID.to_string(),
            cells: self
                .cells
                .iter()
                .map(|c| c.as_ref().map(|v| &v[key]))
                .collect(),
            codec: &self.key_codec,
        }
    }

    pub fn address_of_key(&self, key: &Value) -> Option<usize> {
        let k = self.schema.key_index();
        self.records()
            .find(|r| &r.values[k] == key)
            .map(|r| r.address)
    }

    fn rebuild_key_codec(&mut self) -> Result<(), StorageError> {
        let k = self.schema.key_index();
        let keys: Vec<Value> = self.records().map(|r| r.values[k].clone()).collect();
        self.key_codec = Codec::build(
            CodecScope::new(MAIN_FILE_ID, &self.schema.key().name),
            &keys,
            self.policy,
        )?;
        Ok(())
    }

    fn validate(&self, values: &[Value]) -> Result<(), StorageError> {
        if values.len() != self.schema.len() {
            return Err(StorageError::Arity {
                expected: self.schema.len(),
                got: values.len(),
            });
        }
        for (spec, v) in self.schema.properties().iter().zip(values) {
            if v.value_type() != spec.value_type {
                return Err(StorageError::Type(format!(
                    "`{}` is {} but {} is {}",
                    spec.name,
                    spec.value_type,
                    v.literal(),
                    v.value_type()
                )));
            }
            if let Value::Str(s) = v {
                if s.contains(['\t', '\n', '\r']) {
                    return Err(StorageError::InvalidValue(format!(
                        "string for `{}` contains a tab or line break",
                        spec.name
                    )));
                }
            }
            if let Some(d) = &spec.domain {
                if !d.contains(v) {
                    return Err(StorageError::Domain {
                        property: spec.name.clone(),
                        value: v.literal(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Inserts a record (values in schema order) and returns its address.
    pub fn insert(&mut self, values: Vec<Value>) -> Result<usize, StorageError> {
        self.validate(&values)?;
        let key = &values[self.schema.key_index()];
        if self.key_codec.encode(key).is_some() {
            return Err(StorageError::DuplicateKey(key.literal()));
        }
        let address = match self.cells.iter().position(Option::is_none) {
            Some(i) => i + 1,
            None => {
                let grown = pad_plan(self.cells.len() + 1).padded_size;
                let next = self.cells.len() + 1;
                self.cells.resize(grown, None);
                next
            }
        };
        self.place(address, values)?;
        Ok(address)
    }

    /// Writes a validated record into an empty cell and indexes it.
    fn place(&mut self, address: usize, values: Vec<Value>) -> Result<(), StorageError> {
        for (pos, v) in values.iter().enumerate() {
            if self.schema.properties()[pos].has_aux() {
                self.aux_insert(pos, v, address)?;
            }
        }
        self.cells[address - 1] = Some(values);
        self.rebuild_key_codec()
    }

    /// Lowest-index auxiliary file that lacks the value; a new file when
    /// every existing one has it.
    fn aux_insert(
        &mut self,
        pos: usize,
        value: &Value,
        address: usize,
    ) -> Result<(), StorageError> {
        let policy = self.policy;
        let files = &mut self.aux[pos];
        let entry = AuxEntry {
            value: value.clone(),
            address,
        };
        match files.iter_mut().find(|f| !f.contains(value)) {
            Some(f) => {
                f.entries.push(entry);
                f.rebuild_codec(policy)
            }
            None => {
                let prop = self.schema.properties()[pos].name.clone();
                let k = files.len() + 1;
                files.push(AuxFile::new(&prop, k, vec![entry], policy)?);
                Ok(())
            }
        }
    }

    /// Removes the entry for `address`. The value's occurrence in its
    /// highest-index file moves into the vacated slot so that a value with
    /// multiplicity `j` keeps occupying files `1..=j`.
    fn aux_remove(
        &mut self,
        pos: usize,
        value: &Value,
        address: usize,
    ) -> Result<(), StorageError> {
        let policy = self.policy;
        let files = &mut self.aux[pos];
        let (k, slot) = files
            .iter()
            .enumerate()
            .find_map(|(k, f)| {
                f.entries
                    .iter()
                    .position(|e| e.address == address)
                    .map(|slot| (k, slot))
            })
            .ok_or_else(|| {
                StorageError::Corrupt(format!("address {address} missing from auxiliary files"))
            })?;
        let top = files
            .iter()
            .rposition(|f| f.contains(value))
            .expect("value present in at least file k");
        if top == k {
            files[k].entries.remove(slot);
        } else {
            let from = files[top]
                .entries
                .iter()
                .position(|e| &e.value == value)
                .expect("value present in top file");
            let moved = files[top].entries.remove(from);
            files[k].entries[slot] = moved;
            files[top].rebuild_codec(policy)?;
        }
        files[k].rebuild_codec(policy)?;
        files.retain(|f| !f.entries.is_empty());
        for (i, f) in files.iter_mut().enumerate() {
            if f.index != i + 1 {
                f.index = i + 1;
                f.rebuild_codec(policy)?;
            }
        }
        Ok(())
    }

    fn unplace(&mut self, address: usize) -> Result<Vec<Value>, StorageError> {
        let values = self.cells[address - 1]
            .take()
            .ok_or_else(|| StorageError::Corrupt(format!("address {address} is padding")))?;
        for (pos, v) in values.iter().enumerate() {
            if self.schema.properties()[pos].has_aux() {
                self.aux_remove(pos, v, address)?;
            }
        }
        Ok(values)
    }

    /// Turns the record's cell into padding. The main file never shrinks.
    pub fn delete(&mut self, key: &Value) -> Result<(), StorageError> {
        let address = self
            .address_of_key(key)
            .ok_or_else(|| StorageError::NotFound(key.literal()))?;
        self.unplace(address)?;
        self.rebuild_key_codec()
    }

    /// Replaces the named properties of one record, keeping its address.
    pub fn update(&mut self, key: &Value, changes: &[(String, Value)]) -> Result<(), StorageError> {
        let address = self
            .address_of_key(key)
            .ok_or_else(|| StorageError::NotFound(key.literal()))?;
        let mut values = self.cells[address - 1].clone().expect("real record");
        for (name, v) in changes {
            let pos = self
                .schema
                .position(name)
                .ok_or_else(|| StorageError::Type(format!("unknown property `{name}`")))?;
            values[pos] = v.clone();
        }
        self.validate(&values)?;
        let new_key = &values[self.schema.key_index()];
        if new_key != key && self.key_codec.encode(new_key).is_some() {
            return Err(StorageError::DuplicateKey(new_key.literal()));
        }
        self.unplace(address)?;
        self.place(address, values)
    }

    /// Exhaustive classical evaluation; the reference result for any query.
    pub fn linear_scan(&self, condition: &BoolExpr) -> Result<BTreeSet<usize>, StorageError> {
        binder::check_filter(condition, &self.schema)
            .map_err(|e| StorageError::Type(e.to_string()))?;
        Ok(self
            .records()
            .filter(|r| self.eval(condition, r.values))
            .map(|r| r.address)
            .collect())
    }

    fn eval(&self, e: &BoolExpr, values: &[Value]) -> bool {
        match e {
            BoolExpr::Leaf(c) => {
                let pos = self.schema.position(&c.property).expect("bound property");
                c.holds(&values[pos])
            }
            BoolExpr::And(l, r) => self.eval(l, values) && self.eval(r, values),
            BoolExpr::Or(l, r) => self.eval(l, values) || self.eval(r, values),
            BoolExpr::Not(c) => !self.eval(c, values),
        }
    }

    /// Checks the structural laws of the table; returns the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        if pad_plan(self.cells.len()).padded_size != self.cells.len() {
            return Err(format!(
                "main file size {} is not a power of 4",
                self.cells.len()
            ));
        }
        let k = self.schema.key_index();
        let mut keys = BTreeSet::new();
        for r in self.records() {
            if !keys.insert(&r.values[k]) {
                return Err(format!("duplicate key {}", r.values[k].literal()));
            }
        }
        if self.key_codec.count() != keys.len() {
            return Err("key codec does not cover every record".into());
        }
        for (pos, spec) in self.schema.properties().iter().enumerate() {
            let files = &self.aux[pos];
            if !spec.has_aux() {
                if !files.is_empty() {
                    return Err(format!(
                        "`{}` has auxiliary files but is not searchable",
                        spec.name
                    ));
                }
                continue;
            }
            let mut multiplicity: HashMap<&Value, usize> = HashMap::new();
            for r in self.records() {
                *multiplicity.entry(&r.values[pos]).or_default() += 1;
            }
            let max = multiplicity.values().copied().max().unwrap_or(0);
            if files.len() != max {
                return Err(format!(
                    "`{}` has {} auxiliary files but max multiplicity {max}",
                    spec.name,
                    files.len()
                ));
            }
            let mut seen: HashMap<&Value, usize> = HashMap::new();
            let mut covered = BTreeSet::new();
            for (i, f) in files.iter().enumerate() {
                if f.index != i + 1 || f.entries.is_empty() {
                    return Err(format!(
                        "auxiliary file {} of `{}` misnumbered or empty",
                        f.index, spec.name
                    ));
                }
                let mut local = BTreeSet::new();
                for e in &f.entries {
                    if !local.insert(&e.value) {
                        return Err(format!(
                            "value {} repeated in {}",
                            e.value.literal(),
                            f.file_id()
                        ));
                    }
                    match self.record(e.address) {
                        Some(r) if r.values[pos] == e.value => {}
                        _ => {
                            return Err(format!(
                                "{} points at address {} which does not hold {}",
                                f.file_id(),
                                e.address,
                                e.value.literal()
                            ))
                        }
                    }
                    if !covered.insert(e.address) {
                        return Err(format!(
                            "address {} indexed twice for `{}`",
                            e.address, spec.name
                        ));
                    }
                    *seen.entry(&e.value).or_default() += 1;
                }
                if f.codec.count() != f.entries.len() {
                    return Err(format!("codec of {} is stale", f.file_id()));
                }
            }
            if seen != multiplicity {
                return Err(format!(
                    "auxiliary files of `{}` do not cover the main file",
                    spec.name
                ));
            }
        }
        Ok(())
    }
}
