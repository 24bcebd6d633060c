//! On-disk table directories.
//!
//! ```text
//! <table>/schema.txt
//! <table>/main.tbl
//! <table>/aux/<property>.<k>.aux
//! <table>/codec/*.codec
//! ```
//!
//! Serialization is deterministic, so save → load → save is byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::digitizer::{pad_plan, Codec, OrderPolicy};
use crate::value::Value;

use super::table::{AuxEntry, Table, MAIN_FILE_ID};
use super::{Schema, StorageError};

const PAD_LINE: &str = "#PAD";

pub fn table_dir(data: &Path, table: &str) -> PathBuf {
    data.join(table)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StorageError + '_ {
    move |source| StorageError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write(path: &Path, text: &str) -> Result<(), StorageError> {
    fs::write(path, text).map_err(io_err(path))
}

fn read(path: &Path) -> Result<String, StorageError> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// Removes files with `ext` in `dir` (leftovers of dropped auxiliary files).
fn clear(dir: &Path, ext: &str) -> Result<(), StorageError> {
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.extension().is_some_and(|e| e == ext) {
            fs::remove_file(&path).map_err(io_err(&path))?;
        }
    }
    Ok(())
}

fn codec_file_name(codec: &Codec) -> String {
    format!("{}.{}.codec", codec.scope().file_id, codec.scope().property)
}

impl Table {
    pub fn main_file_text(&self) -> String {
        let mut out = format!(
            "TABLE {} SIZE {} REAL {}\n",
            self.name(),
            self.padded_size(),
            self.real_count()
        );
        for (i, cell) in self.raw_cells().iter().enumerate() {
            match cell {
                Some(values) => {
                    out.push_str(&format!("{}\t0", i + 1));
                    for v in values {
                        out.push('\t');
                        out.push_str(&v.literal());
                    }
                    out.push('\n');
                }
                None => out.push_str(&format!("{}\t1\n", i + 1)),
            }
        }
        out
    }

    pub fn save(&self, dir: &Path) -> Result<(), StorageError> {
        let aux_dir = dir.join("aux");
        let codec_dir = dir.join("codec");
        for d in [dir, &aux_dir, &codec_dir] {
            fs::create_dir_all(d).map_err(io_err(d))?;
        }
        clear(&aux_dir, "aux")?;
        clear(&codec_dir, "codec")?;
        write(&dir.join("schema.txt"), &self.schema().to_text())?;
        write(&dir.join("main.tbl"), &self.main_file_text())?;
        let key = self.key_codec();
        write(&codec_dir.join(codec_file_name(key)), &key.to_text())?;
        for spec in self.schema().properties() {
            for f in self.aux_files(&spec.name) {
                let mut text = format!(
                    "AUX {} {} SIZE {} REAL {}\n",
                    f.property(),
                    f.index(),
                    f.padded_size(),
                    f.real_count()
                );
                for e in f.entries() {
                    text.push_str(&format!("{}\t{}\n", e.value.literal(), e.address));
                }
                for _ in f.real_count()..f.padded_size() {
                    text.push_str(PAD_LINE);
                    text.push('\n');
                }
                write(&aux_dir.join(format!("{}.aux", f.file_id())), &text)?;
                write(
                    &codec_dir.join(codec_file_name(f.codec())),
                    &f.codec().to_text(),
                )?;
            }
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Table, StorageError> {
        let schema = Schema::from_text(&read(&dir.join("schema.txt"))?)?;
        let (name, cells) = parse_main(&read(&dir.join("main.tbl"))?, &schema)?;

        let key_codec_path = dir
            .join("codec")
            .join(format!("{MAIN_FILE_ID}.{}.codec", schema.key().name));
        let stored_key_codec = Codec::from_text(&read(&key_codec_path)?)?;
        let policy: OrderPolicy = stored_key_codec.policy();

        let aux_dir = dir.join("aux");
        let mut by_property: BTreeMap<String, BTreeMap<usize, PathBuf>> = BTreeMap::new();
        if aux_dir.is_dir() {
            for entry in fs::read_dir(&aux_dir).map_err(io_err(&aux_dir))? {
                let path = entry.map_err(io_err(&aux_dir))?.path();
                let Some(stem) = path
                    .file_name()
                    .and_then(|n| n.to_str())
                    .and_then(|n| n.strip_suffix(".aux"))
                else {
                    continue;
                };
                let (prop, k) = stem
                    .rsplit_once('.')
                    .and_then(|(p, k)| k.parse::<usize>().ok().map(|k| (p.to_string(), k)))
                    .ok_or_else(|| {
                        StorageError::Corrupt(format!("bad aux file name {}", path.display()))
                    })?;
                by_property.entry(prop).or_default().insert(k, path);
            }
        }

        let mut aux_entries = vec![Vec::new(); schema.len()];
        for (prop, files) in by_property {
            let pos = schema.position(&prop).ok_or_else(|| {
                StorageError::Corrupt(format!("aux files for unknown property `{prop}`"))
            })?;
            for (expect, (k, path)) in (1..).zip(files) {
                if k != expect {
                    return Err(StorageError::Corrupt(format!(
                        "aux files of `{prop}` skip index {expect}"
                    )));
                }
                let spec = &schema.properties()[pos];
                aux_entries[pos].push(parse_aux(&read(&path)?, &prop, k, spec.value_type)?);
            }
        }

        let table = Table::from_parts(name, schema, cells, aux_entries, policy)?;

        // Codec files are derived data; they must agree with a rebuild.
        let codec_dir = dir.join("codec");
        if table.key_codec() != &stored_key_codec {
            return Err(StorageError::Corrupt("key codec file is stale".into()));
        }
        for spec in table.schema().properties() {
            for f in table.aux_files(&spec.name) {
                let stored = Codec::from_text(&read(&codec_dir.join(codec_file_name(f.codec())))?)?;
                if &stored != f.codec() {
                    return Err(StorageError::Corrupt(format!(
                        "codec of {} is stale",
                        f.file_id()
                    )));
                }
            }
        }
        Ok(table)
    }
}

type Cells = Vec<Option<Vec<Value>>>;

fn parse_main(text: &str, schema: &Schema) -> Result<(String, Cells), StorageError> {
    let bad = |m: String| StorageError::Corrupt(format!("main.tbl: {m}"));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let h: Vec<&str> = header.split(' ').collect();
    if h.len() != 6 || h[0] != "TABLE" || h[2] != "SIZE" || h[4] != "REAL" {
        return Err(bad(format!("bad header `{header}`")));
    }
    let size: usize = h[3].parse().map_err(|_| bad("bad SIZE".into()))?;
    let real: usize = h[5].parse().map_err(|_| bad("bad REAL".into()))?;
    let mut cells = Vec::with_capacity(size);
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 || fields[0].parse::<usize>().ok() != Some(i + 1) {
            return Err(bad(format!("cell {} out of order: `{line}`", i + 1)));
        }
        match fields[1] {
            "1" if fields.len() == 2 => cells.push(None),
            "0" if fields.len() == 2 + schema.len() => {
                let values = fields[2..]
                    .iter()
                    .zip(schema.properties())
                    .map(|(f, spec)| {
                        let v = Value::parse_literal(f).map_err(|e| bad(e.to_string()))?;
                        if v.value_type() != spec.value_type {
                            return Err(bad(format!(
                                "`{}` expects {}",
                                spec.name, spec.value_type
                            )));
                        }
                        Ok(v)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                cells.push(Some(values));
            }
            _ => return Err(bad(format!("bad cell line `{line}`"))),
        }
    }
    if cells.len() != size || cells.iter().filter(|c| c.is_some()).count() != real {
        return Err(bad("header sizes disagree with cells".into()));
    }
    Ok((h[1].to_string(), cells))
}

fn parse_aux(
    text: &str,
    prop: &str,
    k: usize,
    value_type: crate::value::ValueType,
) -> Result<Vec<AuxEntry>, StorageError> {
    let bad = |m: String| StorageError::Corrupt(format!("{prop}.{k}.aux: {m}"));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let expected_prefix = format!("AUX {prop} {k} SIZE ");
    let rest = header
        .strip_prefix(&expected_prefix)
        .ok_or_else(|| bad(format!("bad header `{header}`")))?;
    let (size, real) = rest
        .split_once(" REAL ")
        .and_then(|(s, r)| Some((s.parse::<usize>().ok()?, r.parse::<usize>().ok()?)))
        .ok_or_else(|| bad(format!("bad header `{header}`")))?;
    let mut entries = Vec::new();
    let mut pads = 0;
    for line in lines {
        if line == PAD_LINE {
            pads += 1;
            continue;
        }
        if pads > 0 {
            return Err(bad("entry after padding".into()));
        }
        let (lit, addr) = line
            .rsplit_once('\t')
            .ok_or_else(|| bad(format!("bad entry `{line}`")))?;
        let value = Value::parse_literal(lit).map_err(|e| bad(e.to_string()))?;
        if value.value_type() != value_type {
            return Err(bad(format!("value {lit} has the wrong type")));
        }
        let address = addr
            .parse()
            .map_err(|_| bad(format!("bad address `{addr}`")))?;
        entries.push(AuxEntry { value, address });
    }
    if entries.len() != real || pad_plan(real).padded_size != size || real + pads != size {
        return Err(bad("header sizes disagree with entries".into()));
    }
    Ok(entries)
}
