//! Simulated scenes: generation, the scene manifest and exact regeneration.

use std::path::{Path, PathBuf};

use deblur::pgm::{read_pgm, write_pgm};
use deblur::{BlurOperator64, Image64, NoiseKind, NoiseSpec, OperatorDescriptor, SceneKind};

use crate::failure::{CliError, CliResult};
use crate::manifest::{read_map, Manifest};

pub const SCENE_MANIFEST: &str = "manifest.txt";

/// Inputs that determine a simulated scene bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub scene: SceneKind,
    pub operator: OperatorDescriptor,
    pub noise: NoiseKind,
    pub seed: u64,
}

/// A regenerated scene.
pub struct Scene {
    pub config: SceneConfig,
    pub op: BlurOperator64,
    pub x_true: Image64,
    pub b_true: Image64,
    pub b: Image64,
    /// Known noise `b − b_true`; `None` when `b` was read from a file.
    pub e: Option<Image64>,
    /// `‖e‖₂` of the simulation.
    pub e_norm: f64,
}

impl SceneConfig {
    pub fn generate(&self) -> CliResult<Scene> {
        let op: BlurOperator64 = self.operator.build()?;
        let x_true: Image64 = deblur::generate_test_image(self.scene, self.operator.rows)?;
        let b_true = op.apply(&x_true, false)?;
        let b = NoiseSpec::new(self.noise, self.seed)?.apply(&b_true)?;
        let e = Image64::new(b.matrix() - b_true.matrix())?;
        Ok(Scene {
            config: self.clone(),
            e_norm: e.norm(),
            e: Some(e),
            op,
            x_true,
            b_true,
            b,
        })
    }

    pub fn manifest(&self) -> Manifest {
        let mut m = Manifest::new();
        m.set("seed", self.seed).set("scene", self.scene);
        m.extend_from_text(&self.operator.to_string())
            .expect("descriptor text is well formed");
        m.set("noise", self.noise);
        m
    }

    pub fn load(dir: &Path) -> CliResult<Self> {
        let path = dir.join(SCENE_MANIFEST);
        if !path.exists() {
            return Err(CliError::io(format!(
                "{} not found; run `deblur simulate` first",
                path.display()
            )));
        }
        let map = read_map(&path)?;
        let get = |k: &str| {
            map.get(k)
                .ok_or_else(|| CliError::io(format!("{} lacks {k}", path.display())))
        };
        let bad = |k: &str| CliError::io(format!("{} has a bad {k}", path.display()));
        Ok(Self {
            scene: get("scene")?.parse().map_err(|_| bad("scene"))?,
            operator: OperatorDescriptor::from_map(&map)?,
            noise: get("noise")?.parse().map_err(|_| bad("noise"))?,
            seed: get("seed")?.parse().map_err(|_| bad("seed"))?,
        })
    }
}

/// Writes `x_true.pgm`, `b_true.pgm`, `b.pgm` and the manifest.
pub fn write_scene(dir: &Path, scene: &Scene) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    let seed = Some(scene.config.seed);
    write_pgm(&dir.join("x_true.pgm"), &scene.x_true, seed)?;
    write_pgm(&dir.join("b_true.pgm"), &scene.b_true, seed)?;
    write_pgm(&dir.join("b.pgm"), &scene.b, seed)?;
    let mut m = scene.config.manifest();
    m.set_f64("b_true_norm", scene.b_true.norm())
        .set_f64("b_norm", scene.b.norm())
        .set_f64("e_norm", scene.e_norm)
        .set("x_true", "x_true.pgm")
        .set("b_true", "b_true.pgm")
        .set("b", "b.pgm");
    m.write(&dir.join(SCENE_MANIFEST))
}

/// Rebuilds the scene in `dir` from its manifest, optionally replacing the
/// data by an image file.
pub fn load_scene(dir: &Path, input: Option<&Path>) -> CliResult<Scene> {
    let config = SceneConfig::load(dir)?;
    let mut scene = config.generate()?;
    let map = read_map(&dir.join(SCENE_MANIFEST))?;
    if let Some(stored) = map.get("e_norm") {
        if *stored != format!("{:?}", scene.e_norm) {
            return Err(CliError::io(format!(
                "regenerated noise norm {:?} differs from the manifest's {stored}",
                scene.e_norm
            )));
        }
    }
    if let Some(path) = input {
        let b: Image64 = read_pgm(&resolve(dir, path))?;
        b.check_shape(scene.op.rows(), scene.op.cols())?;
        scene.b = b;
        scene.e = None;
    }
    Ok(scene)
}

/// Relative paths are taken relative to the output directory.
pub fn resolve(dir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        dir.join(path)
    }
}
