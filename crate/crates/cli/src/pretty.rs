use nonsig::rational::Scalar;
use nonsig::resource::ConditionalTable;

/// Left-aligned columns separated by two spaces.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let cols = rows
        .iter()
        .map(Vec::len)
        .chain([header.len()])
        .max()
        .unwrap_or(0);
    let mut width = vec![0; cols];
    for (i, h) in header.iter().enumerate() {
        width[i] = h.len();
    }
    for r in rows {
        for (i, c) in r.iter().enumerate() {
            width[i] = width[i].max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let s: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{c:<w$}", w = width[i]))
            .collect();
        s.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

/// Nonzero entries, one row per (inputs, outputs) pair.
pub fn conditional_table<T: Scalar>(t: &ConditionalTable<T>) -> String {
    let mut rows = Vec::new();
    for x in 0..t.input_count() {
        for (a, v) in t.column(x).iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            rows.push(vec![
                join(&t.input_symbols(x)),
                join(&t.output_symbols(a)),
                v.render(),
            ]);
        }
    }
    let parties = t.parties().join(",");
    table(&[&format!("inputs({parties})"), "outputs", "value"], &rows)
}

fn join(v: &[u32]) -> String {
    v.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}
