//! File formats: FWF1 field snapshots, the CSV tables and verdict files.

mod snapshot;
mod tables;

pub use snapshot::{
    read_snapshot, read_snapshot_from, write_snapshot, write_snapshot_to, MAGIC, VERSION,
};
pub use tables::{
    coherence_rows, energy_rows, format_float, read_table, read_table_from, sweep_rows,
    write_table, write_table_to, write_verdict, Table, COHERENCE_HEADER, ENERGY_HEADER,
    SWEEP_HEADER,
};
