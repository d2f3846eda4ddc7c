//! Static enumeration of replicated locations for a (library, k) pair.
//!
//! Location ids are plain integers so the interpreter and the SMT encoding
//! agree on addressing:
//!   * global j            → j
//!   * field f of row r    → r * F + f + FIELD_LOC_OFFSET, F = total field count
//! Row ids start at ROW_BASE: static rows first, then one row per
//! (allocation site, invocation slot). With row ids ≥ 1000 the field range
//! sits far above the globals; a field of a non-row value (NULL, an integer)
//! lands in a small disjoint "poison" band whose initial value is 0.

use super::unroll::{alloc_sites, field_count};
use crate::dsl::LibraryDef;
use crate::value;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocSite {
    pub method: String,
    pub table: String,
}

#[derive(Debug, Clone)]
pub struct LocationUniverse {
    pub k: usize,
    /// Total field slots across tables; the F in the field-location formula.
    pub field_count: usize,
    pub global_names: Vec<String>,
    /// Field names in library-wide index order.
    pub field_names: Vec<String>,
    pub sites: Vec<AllocSite>,
    pub static_row_names: Vec<String>,
    /// Initial value per location id; total on the universe.
    initval: BTreeMap<i64, i64>,
}

impl LocationUniverse {
    pub fn global_loc(&self, idx: usize) -> i64 {
        idx as i64
    }

    /// Row id of a static row by index.
    pub fn static_row_id(&self, idx: usize) -> i64 {
        value::ROW_BASE + idx as i64
    }

    /// Row id for (allocation site, invocation slot).
    pub fn dynamic_row_id(&self, site: usize, slot: usize) -> i64 {
        value::ROW_BASE + (self.static_row_names.len() + site * self.k + slot) as i64
    }

    /// Location of `row_value.field`; total on all values (poison locations
    /// for non-row values).
    pub fn field_loc(&self, row_value: i64, field_idx: usize) -> i64 {
        row_value * self.field_count as i64 + field_idx as i64 + value::FIELD_LOC_OFFSET
    }

    pub fn initval(&self, loc: i64) -> i64 {
        *self.initval.get(&loc).unwrap_or(&value::DEFAULT_INIT)
    }

    /// All (location, initial value) pairs of the declared universe.
    pub fn initval_entries(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.initval.iter().map(|(l, v)| (*l, *v))
    }

    pub fn size(&self) -> usize {
        self.initval.len()
    }

    /// Human-readable name of a location id, for reports.
    pub fn describe(&self, loc: i64) -> String {
        if loc >= 0 && (loc as usize) < self.global_names.len() {
            return self.global_names[loc as usize].clone();
        }
        let f = self.field_count as i64;
        if f > 0 && loc >= value::ROW_BASE * f {
            let base = loc - value::FIELD_LOC_OFFSET;
            let (row, field) = (base.div_euclid(f), base.rem_euclid(f));
            return format!("{}.{}", value::render(row), self.field_name(field as usize));
        }
        format!("loc{loc}")
    }

    fn field_name(&self, idx: usize) -> String {
        self.field_names.get(idx).cloned().unwrap_or_else(|| format!("f{idx}"))
    }
}

pub fn location_universe(lib: &LibraryDef, k: usize) -> LocationUniverse {
    assert!(k >= 1, "invocation bound must be positive");
    let sites: Vec<AllocSite> = alloc_sites(lib)
        .into_iter()
        .map(|(method, table)| AllocSite { method, table })
        .collect();
    let mut u = LocationUniverse {
        k,
        field_count: field_count(lib),
        global_names: lib.globals.iter().map(|g| g.name.clone()).collect(),
        field_names: lib
            .tables
            .iter()
            .flat_map(|t| t.fields.iter().map(|f| f.name.clone()))
            .collect(),
        sites: sites.clone(),
        static_row_names: lib.static_rows.iter().map(|r| r.name.clone()).collect(),
        initval: BTreeMap::new(),
    };
    let row_id_of = |name: &str| -> i64 {
        let idx = lib
            .static_rows
            .iter()
            .position(|r| r.name == name)
            .expect("parser checked static row");
        value::ROW_BASE + idx as i64
    };

    for (j, g) in lib.globals.iter().enumerate() {
        u.initval.insert(j as i64, g.init.eval(row_id_of));
    }
    // field initializers per row: static rows first, then (site, slot) rows
    let add_row_fields = |u: &mut LocationUniverse, row_id: i64, table: &str| {
        let mut fidx = 0;
        for t in &lib.tables {
            for f in &t.fields {
                if t.name == table {
                    let loc = u.field_loc(row_id, fidx);
                    u.initval.insert(loc, f.init.eval(row_id_of));
                }
                fidx += 1;
            }
        }
    };
    for (i, r) in lib.static_rows.iter().enumerate() {
        let row_id = u.static_row_id(i);
        add_row_fields(&mut u, row_id, &r.table);
    }
    for (s, site) in sites.iter().enumerate() {
        for slot in 0..k {
            let row_id = u.dynamic_row_id(s, slot);
            add_row_fields(&mut u, row_id, &site.table);
        }
    }
    u
}
