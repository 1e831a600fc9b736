use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use pt_core::image::{io, ImageGrid};

/// Exit-code classes: usage problems exit 1, model or data problems exit 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl From<pt_core::Error> for CliError {
    fn from(e: pt_core::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Flags whose values are output paths; the header echoes only their file
/// names so a bundle written elsewhere is byte-identical.
const OUTPUT_FLAGS: &[&str] = &["--out", "--snapshots", "--render", "--energy", "--trace", "--states", "--kde"];

/// Run context: the header line every artifact starts with.
#[derive(Debug, Clone)]
pub struct Run {
    pub seed: Option<u64>,
    header: String,
}

impl Run {
    pub fn new(args: &[String], seed: Option<u64>) -> Self {
        let mut echo = Vec::with_capacity(args.len());
        let mut it = args.iter().peekable();
        while let Some(a) = it.next() {
            let (flag, inline) = match a.split_once('=') {
                Some((f, v)) if f.starts_with("--") => (f, Some(v)),
                _ => (a.as_str(), None),
            };
            if OUTPUT_FLAGS.contains(&flag) {
                let value = match inline {
                    Some(v) => Some(v.to_string()),
                    None => it.next().cloned(),
                };
                echo.push(flag.to_string());
                if let Some(v) = value {
                    echo.push(file_name(&v));
                }
            } else {
                echo.push(a.clone());
            }
        }
        let seed_text = seed.map_or("none".to_string(), |s| s.to_string());
        let header = format!("pt {} seed={} args: {}", env!("CARGO_PKG_VERSION"), seed_text, echo.join(" "));
        Self { seed, header }
    }

    pub fn header(&self) -> &str {
        &self.header
    }

    pub fn seed(&self) -> u64 {
        self.seed.expect("stochastic commands resolve a seed")
    }

    /// `# header` followed by `# key=value` lines and the body.
    pub fn commented(&self, notes: &[(&str, String)], body: &str) -> String {
        let mut s = format!("# {}\n", self.header);
        for (k, v) in notes {
            let _ = writeln!(s, "# {k}={v}");
        }
        s.push_str(body);
        s
    }

    pub fn write_text(&self, path: Option<&Path>, notes: &[(&str, String)], body: &str) -> CliResult<()> {
        emit(path, self.commented(notes, body).as_bytes())
    }

    /// Image by extension: `.ptf` lossless (header in a `.hdr` sidecar),
    /// anything else P5 PGM with the quantization range in a comment.
    pub fn write_image(&self, path: &Path, image: &ImageGrid<f64>, range: Option<(f64, f64)>) -> CliResult<()> {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("ptf")) {
            let mut buf = Vec::new();
            io::write_ptf(&mut buf, image)?;
            emit(Some(path), &buf)?;
            let mut side = path.as_os_str().to_owned();
            side.push(".hdr");
            return emit(Some(&PathBuf::from(side)), format!("# {}\n", self.header).as_bytes());
        }
        let (lo, hi) = range.unwrap_or_else(|| image.min_max());
        let mut buf = Vec::new();
        write!(buf, "P5\n# {}\n# range {} {}\n{} {}\n255\n", self.header, lo, hi, image.width(), image.height())?;
        buf.extend(io::quantize(image, lo, hi));
        emit(Some(path), &buf)
    }
}

fn file_name(v: &str) -> String {
    Path::new(v).file_name().map_or_else(|| v.to_string(), |f| f.to_string_lossy().into_owned())
}

pub fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, bytes).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

pub fn read_to_string(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Reads and decodes a text file, prefixing decode errors with its path.
pub fn load<T, E: std::fmt::Display>(path: &Path, decode: impl FnOnce(&str) -> Result<T, E>) -> CliResult<T> {
    decode(&read_to_string(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub fn read_image(path: &Path) -> CliResult<ImageGrid<f64>> {
    let bytes = fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(io::read_image(&bytes)?)
}

/// CSV records, skipping `#` comment lines; the first row is a header.
pub fn read_csv(path: &Path) -> CliResult<Vec<csv::StringRecord>> {
    let text = read_to_string(path)?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    Ok(rdr.records().collect::<Result<Vec<_>, _>>()?)
}

pub fn parse_field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> CliResult<T> {
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| CliError::Data(format!("bad value in CSV row {line}, column {i}")))
}
