use std::fmt::Write as _;
use std::path::Path;

use super::{LqnModel, TaskKind};

/// Renders an LQN as an indented text tree; the grammar is documented in
/// `docs/lqn-dump.md`.
pub fn dump_lqn(lqn: &LqnModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "lqn {}", lqn.name);
    for p in &lqn.processors {
        let _ = writeln!(
            out,
            "processor {} multiplicity={} speed={}",
            p.id, p.multiplicity, p.speed_factor
        );
        for t in lqn
            .tasks
            .iter()
            .filter(|t| t.processor.as_deref() == Some(p.id.as_str()))
        {
            write_task(&mut out, lqn, t, 1);
        }
    }
    let unhosted: Vec<_> = lqn.tasks.iter().filter(|t| t.processor.is_none()).collect();
    if !unhosted.is_empty() {
        let _ = writeln!(out, "unhosted");
        for t in unhosted {
            write_task(&mut out, lqn, t, 1);
        }
    }
    out
}

fn write_task(out: &mut String, lqn: &LqnModel, task: &super::Task, level: usize) {
    let pad = "  ".repeat(level);
    match task.kind {
        TaskKind::Reference { think_time } => {
            let _ = writeln!(
                out,
                "{pad}task {} reference multiplicity={} think={}",
                task.id, task.multiplicity, think_time
            );
        }
        TaskKind::Server => {
            let _ = writeln!(
                out,
                "{pad}task {} server multiplicity={}",
                task.id, task.multiplicity
            );
        }
    }
    for e in lqn.entries_of(&task.id) {
        let _ = writeln!(out, "{pad}  entry {}", e.id);
        for a in lqn.activities_of(&e.id) {
            let _ = writeln!(out, "{pad}    activity {} demand={}", a.id, a.host_demand);
            for c in &a.calls {
                let _ = writeln!(out, "{pad}      call {} mean={}", c.target, c.mean_calls);
            }
        }
    }
}

pub fn write_dump(lqn: &LqnModel, dir: impl AsRef<Path>) -> std::io::Result<std::path::PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.lqn.txt", sanitize(&lqn.name)));
    std::fs::write(&path, dump_lqn(lqn))?;
    Ok(path)
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
