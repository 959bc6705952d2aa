#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::Arc;

use sketchlevel::pipeline::Pipeline;
use sketchlevel::service::{router, serve, AppState};
use sketchlevel::store::Store;
use sketchlevel_core::levelgen::Material;
use sketchlevel_core::levelxml::{Camera, LevelDocument, ObjectTag, Slingshot, XmlGameObject};
use sketchlevel_core::prng::SplitMix64;
use tokio::sync::oneshot;

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_sketchlevel")
}

pub fn sample(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("samples").join(name)
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Sample drawing, seed and golden file name.
pub const GOLDENS: [(&str, u64, &str); 3] = [
    ("smiling_face.png", 3, "smiling_face_seed3.xml"),
    ("house.png", 7, "house_seed7.xml"),
    ("tree.pgm", 42, "tree_seed42.xml"),
];

/// In-process server on an ephemeral port. Dropping it stops the server.
pub struct TestServer {
    pub addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    task: Option<tokio::task::JoinHandle<()>>,
}

impl TestServer {
    pub async fn start(store_root: &Path) -> Self {
        Self::start_with(store_root, Pipeline::default()).await
    }

    pub async fn start_with(store_root: &Path, pipeline: Pipeline) -> Self {
        let store = Store::open(store_root).unwrap();
        let app = router(Arc::new(AppState { pipeline, store }), None);
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        let (tx, rx) = oneshot::channel();
        let task = tokio::spawn(async move {
            serve(listener, app, async {
                let _ = rx.await;
            })
            .await
            .unwrap();
        });
        Self {
            addr,
            stop: Some(tx),
            task: Some(task),
        }
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}{}", self.addr, path)
    }

    pub async fn stop(mut self) {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
        if let Some(task) = self.task.take() {
            task.await.unwrap();
        }
    }
}

impl Drop for TestServer {
    fn drop(&mut self) {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
    }
}

/// `sketchlevel serve` child process on an ephemeral port.
pub struct ServeProcess {
    pub child: Child,
    pub addr: String,
}

impl ServeProcess {
    pub fn start(store_root: &Path) -> Self {
        let mut child = Command::new(bin())
            .args(["serve", "--bind", "127.0.0.1:0", "--store"])
            .arg(store_root)
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap();
        let stderr = child.stderr.take().unwrap();
        let mut lines = BufReader::new(stderr).lines();
        let addr = loop {
            let line = lines
                .next()
                .expect("server exited before listening")
                .unwrap();
            if let Some(url) = line.strip_prefix("listening on ") {
                break url.to_string();
            }
        };
        // Keep draining stderr so the child never blocks on a full pipe.
        std::thread::spawn(move || for _ in lines {});
        Self { child, addr }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{}", self.addr, path)
    }
}

impl Drop for ServeProcess {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn pick<'a>(rng: &mut SplitMix64, items: &[&'a str]) -> &'a str {
    items[rng.next_index(items.len())]
}

fn number(rng: &mut SplitMix64) -> f64 {
    match rng.next_index(4) {
        0 => (rng.next_index(2001) as f64 - 1000.0) / 4.0,
        1 => (rng.next_f64() - 0.5) * 1e4,
        2 => (rng.next_index(2_000_001) as f64 - 1e6) / 1e6,
        _ => f64::from_bits(rng.next_u64() >> 2) * if rng.next_index(2) == 0 { 1.0 } else { -1.0 },
    }
}

const NAMES: [&str; 8] = [
    "SquareSmall",
    "RectFat",
    "BirdRed",
    "a&b",
    "<odd> \"quoted\" 'single'",
    "tab\there\nnew\rline",
    "ünïcödé ✓",
    "",
];

/// Random valid document, including awkward strings and numbers.
pub fn random_document(seed: u64) -> LevelDocument {
    let mut rng = SplitMix64::new(seed);
    let birds = (0..1 + rng.next_index(4))
        .map(|_| pick(&mut rng, &NAMES).to_string())
        .collect();
    let game_objects = (0..rng.next_index(30))
        .map(|_| {
            let tag = [ObjectTag::Block, ObjectTag::Tnt, ObjectTag::Pig, ObjectTag::Platform][rng.next_index(4)];
            let material = (tag == ObjectTag::Block)
                .then(|| [Material::Wood, Material::Stone, Material::Ice][rng.next_index(3)]);
            XmlGameObject {
                tag,
                type_name: pick(&mut rng, &NAMES).to_string(),
                material,
                x: number(&mut rng),
                y: number(&mut rng),
                rotation: number(&mut rng),
            }
        })
        .collect();
    LevelDocument {
        camera: Camera {
            x: number(&mut rng),
            y: number(&mut rng),
            min_width: number(&mut rng),
            max_width: number(&mut rng),
        },
        birds,
        slingshot: Slingshot {
            x: number(&mut rng),
            y: number(&mut rng),
        },
        game_objects,
    }
}
