//! Client side of the inpainting worker protocol.
//!
//! The worker is a separate process speaking newline-delimited JSON on
//! stdin/stdout: one [`WorkRequest`] per line in, one [`WorkResponse`] per
//! line out, in order. [`MockBackend`] implements the worker's mock mode in
//! process, so nothing here needs the real worker to be installed.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::filtergmm::Category;
use crate::panogeom::{Raster, RgbImage};

/// Environment variable naming the worker executable.
pub const WORKER_ENV: &str = "OBSTRNAV_WORKER";
pub const DEFAULT_PROMPT_TEMPLATE: &str =
    "a {object} blocking the path, photorealistic, indoor scene";

pub fn render_prompt(template: &str, category: Category) -> String {
    template.replace("{object}", category.name())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkRequest {
    pub id: String,
    /// Base64 PNG of the view.
    pub image: String,
    /// Base64 1-bit PNG, same size as the image.
    pub mask: String,
    pub object: String,
    pub prompt: String,
}

impl WorkRequest {
    pub fn new(
        id: impl Into<String>,
        image: &RgbImage,
        mask: &Raster,
        category: Category,
        template: &str,
    ) -> Result<Self> {
        if (image.width(), image.height()) != (mask.width(), mask.height()) {
            return Err(Error::InvalidArgument(format!(
                "mask is {}x{} but the image is {}x{}",
                mask.width(),
                mask.height(),
                image.width(),
                image.height()
            )));
        }
        Ok(Self {
            id: id.into(),
            image: BASE64.encode(image.to_png()),
            mask: BASE64.encode(mask.to_png()),
            object: category.name().to_string(),
            prompt: render_prompt(template, category),
        })
    }
}

/// One response line. Successful responses carry `image`, `score` and
/// `backend`; failures carry `error` (and `id` when the request parsed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkResponse {
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl WorkResponse {
    fn failure(id: Option<String>, error: &str) -> Self {
        Self {
            id,
            image: None,
            score: None,
            backend: None,
            error: Some(error.to_string()),
        }
    }

    /// Decoded image and score, or the worker's error.
    pub fn outcome(&self) -> Result<(RgbImage, f64)> {
        if let Some(e) = &self.error {
            return Err(Error::Worker(format!("request {:?} failed: {e}", self.id)));
        }
        let (Some(image), Some(score)) = (&self.image, self.score) else {
            return Err(Error::Worker("response lacks image or score".into()));
        };
        if !score.is_finite() {
            return Err(Error::Worker(format!("score {score} is not finite")));
        }
        let bytes = BASE64
            .decode(image)
            .map_err(|e| Error::Worker(format!("bad base64 image: {e}")))?;
        Ok((RgbImage::from_png(&bytes)?, score))
    }
}

/// Anything that can answer work requests.
pub trait InpaintBackend {
    fn process(&mut self, request: &WorkRequest) -> Result<WorkResponse>;
}

/// Flat fill color for a category in the mock backend.
pub fn mock_color(category: Category) -> [u8; 3] {
    const PALETTE: [[u8; 3]; 10] = [
        [230, 25, 75],
        [60, 180, 75],
        [255, 225, 25],
        [0, 130, 200],
        [245, 130, 48],
        [145, 30, 180],
        [70, 240, 240],
        [240, 50, 230],
        [210, 245, 60],
        [250, 190, 212],
    ];
    PALETTE[category.index()]
}

/// Score in [0, 1) from SHA-256 of the raw RGB bytes followed by the object name.
pub fn mock_score(image: &RgbImage, object: &str) -> f64 {
    let mut h = Sha256::new();
    h.update(image.raw());
    h.update(object.as_bytes());
    let d = h.finalize();
    f64::from(u32::from_be_bytes([d[0], d[1], d[2], d[3]]) % 10_000) / 10_000.0
}

/// Deterministic stand-in for the inpainting model.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockBackend;

impl MockBackend {
    /// Answer one request line exactly as the worker's mock mode does.
    pub fn respond(&self, line: &str) -> WorkResponse {
        match serde_json::from_str::<WorkRequest>(line) {
            Ok(req) => self.answer(&req),
            Err(_) => WorkResponse::failure(None, "parse"),
        }
    }

    fn answer(&self, req: &WorkRequest) -> WorkResponse {
        let id = Some(req.id.clone());
        let Ok(category) = req.object.parse::<Category>() else {
            return WorkResponse::failure(id, "category");
        };
        let decode = |b64: &str| BASE64.decode(b64).ok();
        let (Some(image), Some(mask)) = (decode(&req.image), decode(&req.mask)) else {
            return WorkResponse::failure(id, "parse");
        };
        let (Ok(mut image), Ok(mask)) = (RgbImage::from_png(&image), Raster::from_png(&mask))
        else {
            return WorkResponse::failure(id, "parse");
        };
        if (image.width(), image.height()) != (mask.width(), mask.height()) {
            return WorkResponse::failure(id, "size");
        }
        let color = mock_color(category);
        for (x, y) in mask.iter_set() {
            image.put(x, y, color);
        }
        WorkResponse {
            id,
            score: Some(mock_score(&image, &req.object)),
            image: Some(BASE64.encode(image.to_png())),
            backend: Some("mock".to_string()),
            error: None,
        }
    }

    /// Serve a request stream until EOF, one response line per input line.
    pub fn serve(&self, input: impl BufRead, mut output: impl Write) -> std::io::Result<()> {
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let response =
                serde_json::to_string(&self.respond(&line)).expect("response serializes");
            writeln!(output, "{response}")?;
        }
        output.flush()
    }
}

impl InpaintBackend for MockBackend {
    fn process(&mut self, request: &WorkRequest) -> Result<WorkResponse> {
        Ok(self.answer(request))
    }
}

/// A worker subprocess.
pub struct WorkerClient {
    child: Child,
    stdin: Option<BufWriter<ChildStdin>>,
    stdout: BufReader<ChildStdout>,
}

impl WorkerClient {
    pub fn spawn(program: &Path, args: &[&str]) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Worker(format!("cannot start {}: {e}", program.display())))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        Ok(Self {
            child,
            stdin: Some(BufWriter::new(stdin)),
            stdout: BufReader::new(stdout),
        })
    }

    /// Spawn the executable named by [`WORKER_ENV`], if set.
    pub fn from_env() -> Result<Option<Self>> {
        match std::env::var_os(WORKER_ENV) {
            Some(p) if !p.is_empty() => Self::spawn(Path::new(&p), &[]).map(Some),
            _ => Ok(None),
        }
    }

    fn send_line(&mut self, line: &str) -> Result<()> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| Error::Worker("worker input already closed".into()))?;
        writeln!(stdin, "{line}")
            .and_then(|_| stdin.flush())
            .map_err(|e| Error::Worker(format!("write failed: {e}")))
    }

    fn read_response(&mut self) -> Result<WorkResponse> {
        let mut line = String::new();
        let n = self
            .stdout
            .read_line(&mut line)
            .map_err(|e| Error::Worker(format!("read failed: {e}")))?;
        if n == 0 {
            return Err(Error::Worker("worker closed its output".into()));
        }
        serde_json::from_str(&line).map_err(|e| Error::Worker(format!("unreadable response: {e}")))
    }

    /// Send a raw line and read the matching response.
    pub fn round_trip(&mut self, line: &str) -> Result<WorkResponse> {
        self.send_line(line)?;
        self.read_response()
    }
}

impl InpaintBackend for WorkerClient {
    fn process(&mut self, request: &WorkRequest) -> Result<WorkResponse> {
        let response =
            self.round_trip(&serde_json::to_string(request).expect("request serializes"))?;
        if response.error.is_none() && response.id.as_deref() != Some(request.id.as_str()) {
            return Err(Error::Worker(format!(
                "response id {:?} does not match request {}",
                response.id, request.id
            )));
        }
        Ok(response)
    }
}

impl Drop for WorkerClient {
    fn drop(&mut self) {
        // Closing stdin lets the worker reach EOF and exit on its own.
        self.stdin.take();
        let _ = self.child.wait();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (RgbImage, Raster) {
        let mut img = RgbImage::new(6, 4);
        for y in 0..4 {
            for x in 0..6 {
                img.put(x, y, [x as u8 * 10, y as u8 * 20, 7]);
            }
        }
        let mut m = Raster::new(6, 4);
        m.set(2, 1, true);
        m.set(3, 1, true);
        (img, m)
    }

    #[test]
    fn mock_fills_only_the_mask() {
        let (img, mask) = sample();
        let req =
            WorkRequest::new("r1", &img, &mask, Category::Dog, DEFAULT_PROMPT_TEMPLATE).unwrap();
        assert_eq!(
            req.prompt,
            "a dog blocking the path, photorealistic, indoor scene"
        );
        let resp = MockBackend.process(&req).unwrap();
        assert_eq!(resp.id.as_deref(), Some("r1"));
        let (out, score) = resp.outcome().unwrap();
        assert!((0.0..1.0).contains(&score));
        assert_eq!(score, mock_score(&out, "dog"));
        for y in 0..4 {
            for x in 0..6 {
                let want = if mask.get(x, y) {
                    mock_color(Category::Dog)
                } else {
                    img.get(x, y)
                };
                assert_eq!(out.get(x, y), want);
            }
        }
    }

    #[test]
    fn error_lines() {
        let r = MockBackend.respond("{not json");
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"id":null,"error":"parse"}"#
        );
        let (img, mask) = sample();
        let mut req =
            WorkRequest::new("r2", &img, &mask, Category::Toy, DEFAULT_PROMPT_TEMPLATE).unwrap();
        req.object = "lamp".into();
        let r = MockBackend.respond(&serde_json::to_string(&req).unwrap());
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"id":"r2","error":"category"}"#
        );
        req.object = "toy".into();
        req.mask = BASE64.encode(Raster::new(3, 3).to_png());
        assert_eq!(
            MockBackend
                .respond(&serde_json::to_string(&req).unwrap())
                .error
                .as_deref(),
            Some("size")
        );
    }

    #[test]
    fn request_rejects_size_mismatch() {
        let (img, _) = sample();
        assert!(WorkRequest::new(
            "x",
            &img,
            &Raster::new(2, 2),
            Category::Sofa,
            DEFAULT_PROMPT_TEMPLATE
        )
        .is_err());
    }
}
