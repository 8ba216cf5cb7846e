//! `fpindex` command line: training, enrollment, identification, evaluation
//! and synthetic data generation.
//!
//! Exit codes: 0 success, 1 usage, 2 data/format problem, 3 pipeline error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fpindex::config::ConfigFile;
use fpindex::core::descriptor::extract_features;
use fpindex::core::evaluate::{pr_er_curve, DEFAULT_PR_GRID};
use fpindex::core::gallery::Gallery;
use fpindex::core::indexvec::build_index_with;
use fpindex::core::synthgen::{gen_finger, gen_impression, PerturbParams};
use fpindex::core::training::{compose_transform, fit_codebook, fit_lda, fit_pca, KMeansParams};
use fpindex::gallery_io::{load_gallery, save_gallery, GalleryLock};
use fpindex::{bench, fpix, manifest, minutiae_io, pgm};

#[derive(Parser)]
#[command(
    name = "fpindex",
    version,
    about = "Fingerprint identification pre-filter: index vectors from minutia descriptors, ranked candidate search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the descriptor transform and cluster codebook from a corpus.
    Train(TrainArgs),
    /// Enroll one finger from one or more impressions.
    Enroll(EnrollArgs),
    /// Rank enrolled subjects against a probe impression.
    Identify(IdentifyArgs),
    /// Compute the penetration/error curve for a labeled query set.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic corpus (images, minutiae, labels, manifest).
    Synth(SynthArgs),
    /// Gallery maintenance.
    Gallery(GalleryArgs),
}

#[derive(Args)]
struct CommonParams {
    /// Optional TOML parameter file (enhancement/Gabor/gates blocks).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Resolution assumed for images without a .dpi sidecar.
    #[arg(long, default_value_t = 500)]
    dpi: u32,
}

impl CommonParams {
    fn load(&self) -> Result<ConfigFile, fpindex::Error> {
        match &self.config {
            Some(path) => ConfigFile::load(path),
            None => Ok(ConfigFile::default()),
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Corpus manifest; every entry must carry a labels file.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out_transform: PathBuf,
    #[arg(long)]
    out_codebook: PathBuf,
    /// Seed for codebook initialization.
    #[arg(long)]
    seed: u64,
    /// Codebook size.
    #[arg(long, default_value_t = 200)]
    k: usize,
    #[arg(long, default_value_t = 30)]
    pca_dim: usize,
    #[arg(long, default_value_t = 25)]
    lda_dim: usize,
    /// Also write .json mirrors next to the binary artifacts.
    #[arg(long)]
    emit_json: bool,
    #[command(flatten)]
    common: CommonParams,
}

#[derive(Args)]
struct EnrollArgs {
    #[arg(long)]
    gallery: PathBuf,
    #[arg(long)]
    subject: String,
    #[arg(long)]
    transform: PathBuf,
    #[arg(long)]
    codebook: PathBuf,
    /// Create the gallery file if it does not exist.
    #[arg(long)]
    create: bool,
    /// Enrollment timestamp (Unix seconds); the fixed default keeps runs
    /// reproducible.
    #[arg(long, default_value_t = 0)]
    timestamp: u64,
    /// Impression images; minutiae are read from `.min` siblings
    /// (`foo.pgm` -> `foo.min`).
    #[arg(required = true)]
    impressions: Vec<PathBuf>,
    #[command(flatten)]
    common: CommonParams,
}

#[derive(Args)]
struct IdentifyArgs {
    #[arg(long)]
    gallery: PathBuf,
    #[arg(long)]
    transform: PathBuf,
    #[arg(long)]
    codebook: PathBuf,
    /// Penetration rate in (0, 1].
    #[arg(long)]
    pr: f64,
    /// Probe image; minutiae read from the `.min` sibling.
    impression: PathBuf,
    #[command(flatten)]
    common: CommonParams,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    gallery: PathBuf,
    #[arg(long)]
    transform: PathBuf,
    #[arg(long)]
    codebook: PathBuf,
    /// Query manifest: subject ids name the true mates.
    #[arg(long)]
    queries: PathBuf,
    /// Output CSV path (`pr,er` rows).
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated penetration grid, e.g. "0.01,0.05,0.2,1.0".
    #[arg(long)]
    grid: Option<String>,
    /// Also time the search stage with this many repetitions.
    #[arg(long)]
    bench: Option<usize>,
    #[command(flatten)]
    common: CommonParams,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory for the corpus.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    fingers: usize,
    #[arg(long)]
    impressions: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Args)]
struct GalleryArgs {
    #[command(subcommand)]
    command: GalleryCommand,
}

#[derive(Subcommand)]
enum GalleryCommand {
    /// Print gallery header and per-record summaries.
    Inspect {
        #[arg(long)]
        gallery: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Enroll(args) => cmd_enroll(args),
        Command::Identify(args) => cmd_identify(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Gallery(args) => match args.command {
            GalleryCommand::Inspect { gallery } => cmd_gallery_inspect(gallery),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fpindex: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn minutiae_sibling(image: &Path) -> PathBuf {
    image.with_extension("min")
}

type Impression = (
    fpindex::core::imaging::GrayImage,
    Vec<fpindex::core::descriptor::Minutia>,
);

fn read_impression(image_path: &Path, dpi: u32) -> Result<Impression, fpindex::Error> {
    let image = pgm::read_pgm(image_path, dpi)?;
    let minutiae = minutiae_io::read_minutiae(&minutiae_sibling(image_path))?;
    Ok((image, minutiae))
}

fn cmd_train(args: TrainArgs) -> Result<(), fpindex::Error> {
    let cfg = args.common.load()?;
    let params = cfg.descriptor_params();
    let man = manifest::read_manifest(&args.manifest)?;

    // Features for PCA and clustering come from every surviving minutia;
    // the discriminant stage additionally needs class labels.
    let mut features: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<Option<(String, i64)>> = Vec::new();
    for entry in &man.entries {
        let label_path = entry.labels.as_ref().ok_or_else(|| {
            fpindex::Error::format(
                &args.manifest,
                format!(
                    "entry {}/{} has no labels column; training needs labeled minutiae",
                    entry.subject_id, entry.impression
                ),
            )
        })?;
        let (image, minutiae) = read_impression(&entry.image, args.common.dpi)?;
        let file_labels = minutiae_io::read_labels(label_path)?;
        if file_labels.len() != minutiae.len() {
            return Err(fpindex::Error::format(
                label_path,
                format!("{} labels for {} minutiae", file_labels.len(), minutiae.len()),
            ));
        }
        let extracted = extract_features(&image, &minutiae, &params)?;
        for (slot, feature) in extracted.kept.iter().zip(&extracted.features) {
            features.push(feature.values().to_vec());
            labels.push(file_labels[*slot].map(|l| (entry.subject_id.clone(), l)));
        }
    }

    let pca = fit_pca(&features, args.pca_dim)?;

    // Dense class ids for the labeled subset, scoped by subject so label
    // integers cannot collide across subjects.
    let mut class_map: BTreeMap<(String, i64), usize> = BTreeMap::new();
    let mut labeled_projected: Vec<Vec<f64>> = Vec::new();
    let mut class_ids: Vec<usize> = Vec::new();
    for (feature, label) in features.iter().zip(&labels) {
        if let Some(key) = label {
            let next = class_map.len();
            let id = *class_map.entry(key.clone()).or_insert(next);
            labeled_projected.push(pca.apply(feature)?);
            class_ids.push(id);
        }
    }
    let lda = fit_lda(&labeled_projected, &class_ids, args.lda_dim)?;
    let transform = compose_transform(&pca, &lda)?;

    let descriptors: Vec<Vec<f64>> = features
        .iter()
        .map(|f| {
            fpindex::core::descriptor::project(
                &fpindex::core::descriptor::GaborFeature::from_values(f.clone()),
                &transform,
            )
            .map(|d| d.values().to_vec())
        })
        .collect::<Result<_, _>>()?;
    let codebook = fit_codebook(
        &descriptors,
        &KMeansParams {
            k: args.k,
            seed: args.seed,
            ..KMeansParams::default()
        },
    )?;

    fpix::write_transform(&args.out_transform, &transform)?;
    fpix::write_codebook(&args.out_codebook, &codebook)?;
    if args.emit_json {
        fpix::write_transform_json(&json_sibling(&args.out_transform), &transform)?;
        fpix::write_codebook_json(&json_sibling(&args.out_codebook), &codebook)?;
    }

    let meta = codebook.training_meta.as_ref().expect("trained codebook");
    println!("samples={}", features.len());
    println!("classes={}", class_map.len());
    println!("dropped_singletons={}", lda.dropped_singletons);
    println!("pca_dim={}", args.pca_dim);
    println!("lda_dim={}", args.lda_dim);
    println!("kmeans_k={}", args.k);
    println!("kmeans_iterations={}", meta.iterations);
    println!("kmeans_inertia={}", meta.final_inertia);
    println!("wrote_transform={}", args.out_transform.display());
    println!("wrote_codebook={}", args.out_codebook.display());
    Ok(())
}

fn json_sibling(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    os.into()
}

fn cmd_enroll(args: EnrollArgs) -> Result<(), fpindex::Error> {
    let cfg = args.common.load()?;
    let transform = fpix::read_transform(&args.transform)?;
    let codebook = fpix::read_codebook(&args.codebook)?;

    let _lock = GalleryLock::acquire(&args.gallery)?;
    let mut gallery = if args.gallery.exists() {
        load_gallery(&args.gallery)?
    } else if args.create {
        Gallery::new(codebook.k())?
    } else {
        return Err(fpindex::Error::format(
            &args.gallery,
            "gallery does not exist (pass --create to start one)",
        ));
    };

    let mut impressions = Vec::with_capacity(args.impressions.len());
    for image_path in &args.impressions {
        impressions.push(read_impression(image_path, args.common.dpi)?);
    }
    let record = gallery.enroll(
        &args.subject,
        &impressions,
        &transform,
        &codebook,
        &cfg.enroll_params(),
        args.timestamp,
    )?;
    let minutiae = record.template.len();
    let source_count = record.template.source_count();
    save_gallery(&args.gallery, &gallery)?;
    println!("enrolled={}", args.subject);
    println!("minutiae={minutiae}");
    println!("source_count={source_count}");
    println!("gallery_size={}", gallery.len());
    Ok(())
}

fn cmd_identify(args: IdentifyArgs) -> Result<(), fpindex::Error> {
    let cfg = args.common.load()?;
    let transform = fpix::read_transform(&args.transform)?;
    let codebook = fpix::read_codebook(&args.codebook)?;
    let _lock = GalleryLock::acquire(&args.gallery)?;
    let gallery = load_gallery(&args.gallery)?;

    let (image, minutiae) = read_impression(&args.impression, args.common.dpi)?;
    let query = build_index_with(
        &image,
        &minutiae,
        &transform,
        &codebook,
        &cfg.descriptor_params(),
        &cfg.index_params(),
    )?;
    let result = gallery.search(&query, args.pr)?;
    for (id, distance) in &result.ranked {
        println!("{id} {distance}");
    }
    Ok(())
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, fpindex::Error> {
    spec.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| {
                fpindex::Error::Core(fpindex::core::Error::InvalidParameter(format!(
                    "bad grid value {s:?}"
                )))
            })
        })
        .collect()
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), fpindex::Error> {
    let cfg = args.common.load()?;
    let transform = fpix::read_transform(&args.transform)?;
    let codebook = fpix::read_codebook(&args.codebook)?;
    let _lock = GalleryLock::acquire(&args.gallery)?;
    let gallery = load_gallery(&args.gallery)?;
    let man = manifest::read_manifest(&args.queries)?;

    let grid = match &args.grid {
        Some(spec) => parse_grid(spec)?,
        None => DEFAULT_PR_GRID.to_vec(),
    };

    let mut queries = Vec::with_capacity(man.entries.len());
    for entry in &man.entries {
        let (image, minutiae) = read_impression(&entry.image, args.common.dpi)?;
        let vector = build_index_with(
            &image,
            &minutiae,
            &transform,
            &codebook,
            &cfg.descriptor_params(),
            &cfg.index_params(),
        )?;
        queries.push((vector, entry.subject_id.clone()));
    }

    let curve = pr_er_curve(&gallery, &queries, &grid)?;
    let mut csv = String::from("pr,er\n");
    for (pr, er) in &curve.points {
        csv.push_str(&format!("{pr},{er}\n"));
    }
    std::fs::write(&args.out, csv).map_err(|e| fpindex::Error::io(&args.out, e))?;
    println!("queries={}", curve.n_queries);
    println!("wrote_csv={}", args.out.display());

    if let Some(repetitions) = args.bench {
        let vectors: Vec<_> = queries.into_iter().map(|(v, _)| v).collect();
        let stats = bench::bench_search(&gallery, &vectors, 1.0, repetitions)?;
        print!("{}", stats.report());
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), fpindex::Error> {
    if args.fingers == 0 || args.impressions == 0 {
        return Err(fpindex::Error::Core(
            fpindex::core::Error::InvalidParameter("need fingers >= 1 and impressions >= 1".into()),
        ));
    }
    std::fs::create_dir_all(&args.out).map_err(|e| fpindex::Error::io(&args.out, e))?;
    let mut entries = Vec::new();
    for fi in 0..args.fingers {
        let subject = format!("finger_{fi:03}");
        let dir = args.out.join(&subject);
        std::fs::create_dir_all(&dir).map_err(|e| fpindex::Error::io(&dir, e))?;
        let finger = gen_finger(args.seed.wrapping_add(fi as u64));
        for ii in 0..args.impressions {
            let imp = gen_impression(&finger, ii as u64, &PerturbParams::default());
            let image_rel = PathBuf::from(&subject).join(format!("imp_{ii}.pgm"));
            let min_rel = PathBuf::from(&subject).join(format!("imp_{ii}.min"));
            let lbl_rel = PathBuf::from(&subject).join(format!("imp_{ii}.lbl"));
            pgm::write_pgm(&args.out.join(&image_rel), &imp.image)?;
            minutiae_io::write_minutiae(&args.out.join(&min_rel), &imp.minutiae)?;
            let labels: Vec<Option<i64>> = imp
                .labels
                .iter()
                .map(|l| l.map(|gt| fi as i64 * 1000 + gt as i64))
                .collect();
            minutiae_io::write_labels(&args.out.join(&lbl_rel), &labels)?;
            entries.push(manifest::ManifestEntry {
                subject_id: subject.clone(),
                impression: ii as u32,
                image: image_rel,
                minutiae: min_rel,
                labels: Some(lbl_rel),
            });
        }
    }
    let manifest_path = args.out.join("manifest.txt");
    manifest::write_manifest(&manifest_path, &manifest::Manifest { entries })?;
    println!("fingers={}", args.fingers);
    println!("impressions={}", args.impressions);
    println!("wrote_manifest={}", manifest_path.display());
    Ok(())
}

fn cmd_gallery_inspect(gallery_path: PathBuf) -> Result<(), fpindex::Error> {
    let _lock = GalleryLock::acquire(&gallery_path)?;
    let gallery = load_gallery(&gallery_path)?;
    println!("gallery={}", gallery_path.display());
    println!("dim={}", gallery.dim());
    println!("records={}", gallery.len());
    for record in gallery.records() {
        println!(
            "{} n_minutiae={} source_count={} enrolled_at={}",
            record.subject_id,
            record.template.len(),
            record.template.source_count(),
            record.enrolled_at
        );
    }
    Ok(())
}
