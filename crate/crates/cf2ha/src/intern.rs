//! Process-wide string interner shared by alphabet symbols and state names.

use std::collections::HashMap;
use std::sync::{LazyLock, RwLock};

struct Table {
    ids: HashMap<&'static str, u32>,
    names: Vec<&'static str>,
}

static TABLE: LazyLock<RwLock<Table>> = LazyLock::new(|| {
    RwLock::new(Table {
        ids: HashMap::new(),
        names: Vec::new(),
    })
});

pub(crate) fn intern(name: &str) -> u32 {
    if let Some(&id) = TABLE.read().expect("interner poisoned").ids.get(name) {
        return id;
    }
    let mut table = TABLE.write().expect("interner poisoned");
    if let Some(&id) = table.ids.get(name) {
        return id;
    }
    // Interned names live for the whole process; the set of names is small.
    let leaked: &'static str = Box::leak(name.to_owned().into_boxed_str());
    let id = u32::try_from(table.names.len()).expect("interner overflow");
    table.names.push(leaked);
    table.ids.insert(leaked, id);
    id
}

pub(crate) fn lookup(id: u32) -> &'static str {
    TABLE.read().expect("interner poisoned").names[id as usize]
}
