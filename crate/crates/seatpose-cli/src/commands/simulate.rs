//! Corpus generation: every chair x subject x activity triple becomes one
//! recording directory under the data dir.

use seatpose::data::{write_recording, Activity};
use seatpose::sim::{generate_corpus, SubjectSpec};
use seatpose::{Error, Result};

use crate::context::Context;

pub fn run(ctx: &Context) -> Result<()> {
    let cfg = &ctx.cfg;
    let chairs = ctx.chairs()?;
    let subjects: Vec<SubjectSpec> = cfg
        .simulate
        .subjects
        .iter()
        .map(|s| SubjectSpec { id: s.id.clone(), height_m: s.height_m, mass_kg: s.mass_kg })
        .collect();
    let activities: Vec<Activity> = if cfg.simulate.activities.is_empty() {
        Activity::ALL.to_vec()
    } else {
        cfg.simulate
            .activities
            .iter()
            .map(|name| {
                Activity::from_name(name)
                    .ok_or_else(|| Error::Config(format!("unknown activity {name:?}")))
            })
            .collect::<Result<_>>()?
    };

    let corpus = generate_corpus(
        &chairs,
        &subjects,
        &activities,
        cfg.simulate.seconds_per_recording,
        cfg.seed,
    )?;

    let mut manifest = ctx.manifest("simulate");
    for name in &cfg.simulate.chairs {
        let path = std::path::Path::new(name);
        if path.is_file() {
            manifest.add_input(path)?;
        }
    }

    std::fs::create_dir_all(&cfg.data_dir)
        .map_err(|e| Error::io(cfg.data_dir.display().to_string(), e))?;
    let mut total_frames = 0usize;
    for rec in &corpus.recordings {
        let dir = cfg
            .data_dir
            .join(format!("{}__{}__{}", rec.chair_id, rec.subject_id, rec.activity.name()));
        write_recording(rec, &dir)?;
        total_frames += rec.frames();
        for file in ["meta.toml", "pressure.bin", "pose.bin"] {
            manifest.add_output(&dir.join(file))?;
        }
    }
    manifest.note(format!("recordings = {}", corpus.recordings.len()));
    manifest.note(format!("frames = {total_frames}"));
    manifest.note(format!("skipped_frames = {}", corpus.skipped_frames));
    ctx.write_manifest(&manifest, "simulate_manifest.toml")?;

    println!(
        "simulate: {} recordings, {} frames ({} skipped) -> {}",
        corpus.recordings.len(),
        total_frames,
        corpus.skipped_frames,
        cfg.data_dir.display()
    );
    Ok(())
}
