//! Reader and writer for the ISPD 2005 Bookshelf placement format.
//!
//! A design is described by an `.aux` file naming the `.nodes`, `.nets`,
//! `.pl` and (optionally) `.scl` files that live next to it. Terminal nodes
//! become fixed cells. Pin offsets in `.nets` are relative to the cell
//! center; they are converted to lower-left-relative offsets here so the
//! rest of the crate only deals with one convention.
//!
//! All parse functions work on in-memory text so that malformed input is
//! reported as [`Error::Parse`] or [`Error::CountMismatch`], never a panic.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::warn;

use crate::error::{Error, Result};
use crate::model::{
    classify_macros, default_grid_size, Canvas, Cell, CellKind, Net, Netlist, Pin, Placement, Point,
    DEFAULT_MACRO_AREA_FACTOR,
};

#[derive(Debug, Clone, PartialEq)]
pub struct BookshelfDesign {
    pub netlist: Netlist,
    pub initial: Placement,
    pub canvas: Canvas,
    pub row_height: Option<f64>,
    /// Cells declared `terminal_NI`. They are handled like any other fixed
    /// cell; the flag only survives so `/FIXED_NI` is written back.
    pub non_image: Vec<bool>,
}

impl BookshelfDesign {
    pub fn name_index(&self) -> HashMap<&str, usize> {
        self.netlist
            .cells()
            .iter()
            .map(|c| (c.name.as_str(), c.id))
            .collect()
    }
}

/// File contents for one design, plus the labels used in error messages.
#[derive(Debug, Clone, Copy)]
pub struct BookshelfSources<'a> {
    pub nodes: (&'a str, &'a str),
    pub nets: (&'a str, &'a str),
    pub pl: (&'a str, &'a str),
    pub scl: Option<(&'a str, &'a str)>,
}

/// Paths named by an `.aux` file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuxFiles {
    pub nodes: PathBuf,
    pub nets: PathBuf,
    pub pl: PathBuf,
    pub scl: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Non-empty, comment-stripped lines with their 1-based line numbers.
fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn is_format_banner(line: &str) -> bool {
    line.starts_with("UCLA")
}

/// Returns the text after `key :` when `line` is such a header.
fn header_value<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.strip_prefix(key)?;
    let rest_trim = rest.trim_start();
    if !rest.is_empty() && rest_trim.len() == rest.len() && !rest.starts_with(':') {
        // `key` is only a prefix of a longer word
        return None;
    }
    Some(rest_trim.strip_prefix(':').unwrap_or(rest_trim).trim())
}

fn parse_count(file: &str, line: usize, value: &str) -> Result<usize> {
    let token = value.split_whitespace().next().unwrap_or("");
    token
        .parse::<usize>()
        .map_err(|_| Error::parse(file, line, format!("expected a count, found '{value}'")))
}

fn parse_num(file: &str, line: usize, token: &str, what: &str) -> Result<f64> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(file, line, format!("invalid {what} '{token}'"))),
    }
}

fn check_count(file: &str, what: &'static str, declared: Option<usize>, found: usize) -> Result<()> {
    match declared {
        Some(declared) if declared != found => Err(Error::CountMismatch {
            file: file.to_string(),
            what,
            declared,
            found,
        }),
        _ => Ok(()),
    }
}

/// Reads the `.aux` file and resolves the file set relative to it.
pub fn read_aux(path: &Path) -> Result<AuxFiles> {
    let text = read(path)?;
    let label = path.display().to_string();
    let dir = path.parent().unwrap_or_else(|| Path::new(""));
    parse_aux_text(&text, &label, dir)
}

pub fn parse_aux_text(text: &str, label: &str, dir: &Path) -> Result<AuxFiles> {
    let (line_no, line) = records(text)
        .next()
        .ok_or_else(|| Error::parse(label, 1, "empty .aux file"))?;
    let files = header_value(line, "RowBasedPlacement")
        .ok_or_else(|| Error::parse(label, line_no, "expected 'RowBasedPlacement : <files>'"))?;
    let mut nodes = None;
    let mut nets = None;
    let mut pl = None;
    let mut scl = None;
    for name in files.split_whitespace() {
        let slot = match Path::new(name).extension().and_then(|e| e.to_str()) {
            Some("nodes") => &mut nodes,
            Some("nets") => &mut nets,
            Some("pl") => &mut pl,
            Some("scl") => &mut scl,
            // .wts and friends carry nothing we use
            _ => continue,
        };
        *slot = Some(dir.join(name));
    }
    let missing = |what: &str| Error::parse(label, line_no, format!("no {what} file listed"));
    Ok(AuxFiles {
        nodes: nodes.ok_or_else(|| missing(".nodes"))?,
        nets: nets.ok_or_else(|| missing(".nets"))?,
        pl: pl.ok_or_else(|| missing(".pl"))?,
        scl,
    })
}

/// Parses a complete design from its `.aux` file.
pub fn parse_aux(path: &Path) -> Result<BookshelfDesign> {
    let files = read_aux(path)?;
    let nodes = read(&files.nodes)?;
    let nets = read(&files.nets)?;
    let pl = read(&files.pl)?;
    let scl = files.scl.as_deref().map(read).transpose()?;
    let labels = (
        files.nodes.display().to_string(),
        files.nets.display().to_string(),
        files.pl.display().to_string(),
        files.scl.as_ref().map(|p| p.display().to_string()),
    );
    parse_design(&BookshelfSources {
        nodes: (&labels.0, &nodes),
        nets: (&labels.1, &nets),
        pl: (&labels.2, &pl),
        scl: match (&labels.3, &scl) {
            (Some(l), Some(t)) => Some((l.as_str(), t.as_str())),
            _ => None,
        },
    })
}

/// Like [`parse_aux`], but positions come from `pl_path` instead of the
/// `.pl` listed in the `.aux`.
pub fn parse_aux_with_pl(path: &Path, pl_path: &Path) -> Result<BookshelfDesign> {
    let design = parse_aux(path)?;
    let text = read(pl_path)?;
    let (placement, _) = parse_pl(&text, &pl_path.display().to_string(), &design.netlist)?;
    Ok(BookshelfDesign {
        initial: placement,
        ..design
    })
}

pub fn parse_design(src: &BookshelfSources<'_>) -> Result<BookshelfDesign> {
    let nodes = parse_nodes(src.nodes.1, src.nodes.0)?;
    let index: HashMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name.as_str(), i))
        .collect();
    let nets = parse_nets(src.nets.1, src.nets.0, &nodes, &index)?;
    let rows = match src.scl {
        Some((label, text)) => Some(parse_scl(text, label)?),
        None => None,
    };
    let row_height = rows.as_ref().and_then(|r| r.row_height);

    let mut cells: Vec<Cell> = nodes
        .iter()
        .enumerate()
        .map(|(id, n)| Cell {
            id,
            name: n.name.clone(),
            width: n.width,
            height: n.height,
            kind: if n.terminal.is_some() { CellKind::Fixed } else { CellKind::Movable },
            is_macro: false,
        })
        .collect();
    classify_macros(&mut cells, row_height, DEFAULT_MACRO_AREA_FACTOR);
    let non_image = nodes.iter().map(|n| n.terminal == Some(Terminal::NonImage)).collect();
    let netlist = Netlist::new(cells, nets)
        .map_err(|e| Error::parse(src.nets.0, 0, e.to_string()))?;

    let (initial, _) = parse_pl(src.pl.1, src.pl.0, &netlist)?;

    let movable = netlist.movable_cells().count();
    let grid = default_grid_size(movable);
    let bounds = match rows.as_ref().and_then(|r| r.bounds) {
        Some(b) => b,
        None => placement_bounds(&netlist, &initial),
    };
    let canvas = Canvas::new(bounds.0, bounds.1, bounds.2, bounds.3, grid, grid).map_err(|e| {
        let label = src.scl.map(|s| s.0).unwrap_or(src.pl.0);
        Error::parse(label, 0, e.to_string())
    })?;

    Ok(BookshelfDesign {
        netlist,
        initial,
        canvas,
        row_height,
        non_image,
    })
}

/// Bounding box of all cells at their initial positions, or the unit square
/// for an empty design.
fn placement_bounds(netlist: &Netlist, placement: &Placement) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in netlist.cells() {
        let p = placement.get(c.id);
        b.0 = b.0.min(p.x);
        b.1 = b.1.min(p.y);
        b.2 = b.2.max(p.x + c.width);
        b.3 = b.3.max(p.y + c.height);
    }
    if b.0.is_finite() && b.2 > b.0 && b.3 > b.1 {
        b
    } else {
        (0.0, 0.0, 1.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Terminal {
    Regular,
    NonImage,
}

#[derive(Debug, Clone)]
struct NodeRecord {
    name: String,
    width: f64,
    height: f64,
    terminal: Option<Terminal>,
}

fn parse_nodes(text: &str, file: &str) -> Result<Vec<NodeRecord>> {
    let mut declared_nodes = None;
    let mut declared_terminals = None;
    let mut nodes: Vec<NodeRecord> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (no, line) in records(text) {
        if is_format_banner(line) {
            continue;
        }
        if let Some(v) = header_value(line, "NumNodes") {
            declared_nodes = Some(parse_count(file, no, v)?);
            continue;
        }
        if let Some(v) = header_value(line, "NumTerminals") {
            declared_terminals = Some(parse_count(file, no, v)?);
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 3 {
            return Err(Error::parse(file, no, "expected '<name> <width> <height> [terminal]'"));
        }
        let width = parse_num(file, no, tokens[1], "width")?;
        let height = parse_num(file, no, tokens[2], "height")?;
        if width <= 0.0 || height <= 0.0 {
            return Err(Error::parse(file, no, format!("non-positive size {width} x {height}")));
        }
        let terminal = match tokens.get(3).copied() {
            Some("terminal") => Some(Terminal::Regular),
            Some("terminal_NI") => Some(Terminal::NonImage),
            _ => None,
        };
        let used = 3 + usize::from(terminal.is_some());
        if tokens.len() > used {
            warn!("{file}:{no}: ignoring trailing tokens {:?}", &tokens[used..]);
        }
        if seen.insert(tokens[0].to_string(), no).is_some() {
            return Err(Error::parse(file, no, format!("duplicate node '{}'", tokens[0])));
        }
        nodes.push(NodeRecord {
            name: tokens[0].to_string(),
            width,
            height,
            terminal,
        });
    }
    check_count(file, "nodes", declared_nodes, nodes.len())?;
    let terminals = nodes.iter().filter(|n| n.terminal.is_some()).count();
    check_count(file, "terminals", declared_terminals, terminals)?;
    Ok(nodes)
}

struct OpenNet {
    name: String,
    degree: usize,
    line: usize,
    pins: Vec<Pin>,
}

fn parse_nets(
    text: &str,
    file: &str,
    nodes: &[NodeRecord],
    index: &HashMap<&str, usize>,
) -> Result<Vec<Net>> {
    let mut declared_nets = None;
    let mut declared_pins = None;
    let mut nets: Vec<Net> = Vec::new();
    let mut open: Option<OpenNet> = None;
    let mut total_pins = 0usize;

    let close = |open: OpenNet, nets: &mut Vec<Net>| -> Result<()> {
        if open.pins.len() != open.degree {
            return Err(Error::parse(
                file,
                open.line,
                format!(
                    "net '{}' declares degree {} but lists {} pins",
                    open.name,
                    open.degree,
                    open.pins.len()
                ),
            ));
        }
        let id = nets.len();
        nets.push(Net {
            id,
            name: open.name,
            pins: open.pins,
        });
        Ok(())
    };

    for (no, line) in records(text) {
        if is_format_banner(line) {
            continue;
        }
        if let Some(v) = header_value(line, "NumNets") {
            declared_nets = Some(parse_count(file, no, v)?);
            continue;
        }
        if let Some(v) = header_value(line, "NumPins") {
            declared_pins = Some(parse_count(file, no, v)?);
            continue;
        }
        if let Some(v) = header_value(line, "NetDegree") {
            if let Some(prev) = open.take() {
                close(prev, &mut nets)?;
            }
            let degree = parse_count(file, no, v)?;
            if degree == 0 {
                return Err(Error::parse(file, no, "net with degree 0"));
            }
            let mut rest = v.split_whitespace().skip(1);
            let name = rest.next().map(str::to_string).unwrap_or_else(|| format!("n{}", nets.len()));
            if let Some(extra) = rest.next() {
                warn!("{file}:{no}: ignoring trailing token '{extra}'");
            }
            open = Some(OpenNet {
                name,
                degree,
                line: no,
                pins: Vec::with_capacity(degree.min(1024)),
            });
            continue;
        }

        let net = open
            .as_mut()
            .ok_or_else(|| Error::parse(file, no, "pin record outside of any NetDegree block"))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let name = tokens[0];
        let cell = *index
            .get(name)
            .ok_or_else(|| Error::parse(file, no, format!("unknown node '{name}'")))?;
        // `<name> [I|O|B] [: dx dy]`
        let mut rest = &tokens[1..];
        if let Some(&dir) = rest.first() {
            if dir != ":" {
                rest = &rest[1..];
            }
        }
        let (raw_dx, raw_dy) = match rest {
            [] => (0.0, 0.0),
            [":", dx, dy, tail @ ..] => {
                if !tail.is_empty() {
                    warn!("{file}:{no}: ignoring trailing tokens {tail:?}");
                }
                (parse_num(file, no, dx, "pin offset")?, parse_num(file, no, dy, "pin offset")?)
            }
            _ => return Err(Error::parse(file, no, "expected '<node> <dir> : <dx> <dy>'")),
        };
        let node = &nodes[cell];
        let dx = 0.5 * node.width + raw_dx;
        let dy = 0.5 * node.height + raw_dy;
        let cdx = dx.clamp(0.0, node.width);
        let cdy = dy.clamp(0.0, node.height);
        if cdx != dx || cdy != dy {
            warn!("{file}:{no}: pin offset of '{name}' lies outside the cell, clamped");
        }
        if net.pins.len() == net.degree {
            return Err(Error::parse(
                file,
                no,
                format!("net '{}' has more pins than its degree {}", net.name, net.degree),
            ));
        }
        net.pins.push(Pin { cell, dx: cdx, dy: cdy });
        total_pins += 1;
    }
    if let Some(prev) = open.take() {
        close(prev, &mut nets)?;
    }
    check_count(file, "nets", declared_nets, nets.len())?;
    check_count(file, "pins", declared_pins, total_pins)?;
    Ok(nets)
}

/// Parses `.pl` text against an existing netlist. Returns the placement and
/// the set of cells the file marks `/FIXED` or `/FIXED_NI`. Cells missing
/// from the file stay at the origin.
pub fn parse_pl(text: &str, file: &str, netlist: &Netlist) -> Result<(Placement, Vec<bool>)> {
    let index: HashMap<&str, usize> = netlist
        .cells()
        .iter()
        .map(|c| (c.name.as_str(), c.id))
        .collect();
    let mut positions = vec![Point::default(); netlist.num_cells()];
    let mut seen = vec![false; netlist.num_cells()];
    let mut fixed = vec![false; netlist.num_cells()];
    for (no, line) in records(text) {
        if is_format_banner(line) {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 3 {
            return Err(Error::parse(file, no, "expected '<name> <x> <y> : <orient>'"));
        }
        let id = *index
            .get(tokens[0])
            .ok_or_else(|| Error::parse(file, no, format!("unknown node '{}'", tokens[0])))?;
        let x = parse_num(file, no, tokens[1], "x coordinate")?;
        let y = parse_num(file, no, tokens[2], "y coordinate")?;
        let mut rest = &tokens[3..];
        if let [":", orient, tail @ ..] = rest {
            if *orient != "N" {
                warn!("{file}:{no}: orientation '{orient}' ignored");
            }
            rest = tail;
        } else if rest.first() == Some(&":") {
            return Err(Error::parse(file, no, "missing orientation after ':'"));
        }
        if let Some(flag) = rest.first() {
            if flag.starts_with("/FIXED") {
                fixed[id] = true;
                rest = &rest[1..];
            }
        }
        if !rest.is_empty() {
            warn!("{file}:{no}: ignoring trailing tokens {rest:?}");
        }
        if seen[id] {
            warn!("{file}:{no}: node '{}' placed twice, keeping the last", tokens[0]);
        }
        seen[id] = true;
        positions[id] = Point::new(x, y);
    }
    let missing = seen.iter().filter(|s| !**s).count();
    if missing > 0 {
        warn!("{file}: {missing} nodes have no position, using the origin");
    }
    Ok((Placement::new(positions), fixed))
}

#[derive(Debug, Clone, PartialEq)]
struct Rows {
    row_height: Option<f64>,
    bounds: Option<(f64, f64, f64, f64)>,
}

#[derive(Default)]
struct RowRecord {
    coordinate: Option<f64>,
    height: Option<f64>,
    site_spacing: Option<f64>,
    site_width: Option<f64>,
    origin: Option<f64>,
    num_sites: Option<usize>,
}

fn parse_scl(text: &str, file: &str) -> Result<Rows> {
    let mut declared = None;
    let mut rows: Vec<(usize, RowRecord)> = Vec::new();
    let mut current: Option<(usize, RowRecord)> = None;
    for (no, line) in records(text) {
        if is_format_banner(line) {
            continue;
        }
        if let Some(v) = header_value(line, "NumRows") {
            declared = Some(parse_count(file, no, v)?);
            continue;
        }
        if line.starts_with("CoreRow") {
            if current.is_some() {
                return Err(Error::parse(file, no, "CoreRow without matching End"));
            }
            current = Some((no, RowRecord::default()));
            continue;
        }
        if line == "End" {
            let row = current
                .take()
                .ok_or_else(|| Error::parse(file, no, "End without CoreRow"))?;
            rows.push(row);
            continue;
        }
        let (_, row) = current
            .as_mut()
            .ok_or_else(|| Error::parse(file, no, format!("unexpected record '{line}'")))?;
        if let Some(v) = header_value(line, "Coordinate") {
            row.coordinate = Some(parse_num(file, no, first(v), "row coordinate")?);
        } else if let Some(v) = header_value(line, "Height") {
            row.height = Some(parse_num(file, no, first(v), "row height")?);
        } else if let Some(v) = header_value(line, "Sitewidth") {
            row.site_width = Some(parse_num(file, no, first(v), "site width")?);
        } else if let Some(v) = header_value(line, "Sitespacing") {
            row.site_spacing = Some(parse_num(file, no, first(v), "site spacing")?);
        } else if let Some(v) = header_value(line, "SubrowOrigin") {
            let tokens: Vec<&str> = v.split_whitespace().collect();
            row.origin = Some(parse_num(file, no, tokens.first().copied().unwrap_or(""), "subrow origin")?);
            match tokens.get(1..) {
                Some([key, rest @ ..]) if key.eq_ignore_ascii_case("NumSites") => {
                    let value = match rest {
                        [":", n, ..] => *n,
                        [n, ..] => n.trim_start_matches(':'),
                        [] => "",
                    };
                    row.num_sites = Some(parse_count(file, no, value)?);
                }
                Some([]) | None => {}
                Some(other) => warn!("{file}:{no}: ignoring trailing tokens {other:?}"),
            }
        } else if header_value(line, "Siteorient").is_some() || header_value(line, "Sitesymmetry").is_some() {
            // not needed without legalization
        } else {
            warn!("{file}:{no}: ignoring unknown row record '{line}'");
        }
    }
    if let Some((no, _)) = current {
        return Err(Error::parse(file, no, "CoreRow without matching End"));
    }
    check_count(file, "rows", declared, rows.len())?;

    let mut row_height: Option<f64> = None;
    let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (no, row) in &rows {
        let (Some(y), Some(h)) = (row.coordinate, row.height) else {
            return Err(Error::parse(file, *no, "row lacks Coordinate or Height"));
        };
        if h <= 0.0 {
            return Err(Error::parse(file, *no, "row height must be positive"));
        }
        row_height = Some(row_height.map_or(h, |rh| rh.min(h)));
        let x0 = row.origin.unwrap_or(0.0);
        let spacing = row.site_spacing.or(row.site_width).unwrap_or(1.0);
        let width = row.num_sites.unwrap_or(0) as f64 * spacing;
        b.0 = b.0.min(x0);
        b.1 = b.1.min(y);
        b.2 = b.2.max(x0 + width);
        b.3 = b.3.max(y + h);
    }
    let bounds = (b.0.is_finite() && b.2 > b.0 && b.3 > b.1).then_some(b);
    Ok(Rows { row_height, bounds })
}

fn first(v: &str) -> &str {
    v.split_whitespace().next().unwrap_or("")
}

fn fmt_coord(v: f64) -> String {
    // `Display` for f64 is the shortest representation that round-trips
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

/// Renders a placement in `.pl` format.
pub fn format_pl(design: &BookshelfDesign, placement: &Placement) -> String {
    let mut out = String::from("UCLA pl 1.0\n\n");
    for cell in design.netlist.cells() {
        let p = placement.get(cell.id);
        let _ = write!(out, "{} {} {} : N", cell.name, fmt_coord(p.x), fmt_coord(p.y));
        if cell.is_fixed() {
            out.push_str(if design.non_image.get(cell.id).copied().unwrap_or(false) {
                " /FIXED_NI"
            } else {
                " /FIXED"
            });
        }
        out.push('\n');
    }
    out
}

pub fn write_pl(design: &BookshelfDesign, placement: &Placement, path: &Path) -> Result<()> {
    std::fs::write(path, format_pl(design, placement)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Renders the `.nodes`, `.nets` and `.scl` texts for a design, used to
/// commit generated benchmarks. Pin offsets are written center-relative.
pub fn format_nodes(design: &BookshelfDesign) -> String {
    let nl = &design.netlist;
    let terminals = nl.cells().iter().filter(|c| c.is_fixed()).count();
    let mut out = format!(
        "UCLA nodes 1.0\n\nNumNodes : {}\nNumTerminals : {}\n",
        nl.num_cells(),
        terminals
    );
    for c in nl.cells() {
        let _ = write!(out, "{} {} {}", c.name, fmt_coord(c.width), fmt_coord(c.height));
        if c.is_fixed() {
            out.push_str(if design.non_image[c.id] { " terminal_NI" } else { " terminal" });
        }
        out.push('\n');
    }
    out
}

pub fn format_nets(design: &BookshelfDesign) -> String {
    let nl = &design.netlist;
    let mut out = format!(
        "UCLA nets 1.0\n\nNumNets : {}\nNumPins : {}\n",
        nl.num_nets(),
        nl.num_pins()
    );
    for net in nl.nets() {
        let _ = writeln!(out, "NetDegree : {} {}", net.pins.len(), net.name);
        for pin in &net.pins {
            let c = nl.cell(pin.cell);
            let _ = writeln!(
                out,
                "  {} B : {} {}",
                c.name,
                fmt_coord(pin.dx - 0.5 * c.width),
                fmt_coord(pin.dy - 0.5 * c.height)
            );
        }
    }
    out
}

/// Uniform rows of unit sites covering the canvas.
pub fn format_scl(canvas: &Canvas, row_height: f64) -> String {
    let rows = (canvas.height() / row_height).floor() as usize;
    let sites = canvas.width().floor() as usize;
    let mut out = format!("UCLA scl 1.0\n\nNumRows : {rows}\n\n");
    for r in 0..rows {
        let y = canvas.yl + r as f64 * row_height;
        let _ = write!(
            out,
            "CoreRow Horizontal\n  Coordinate : {}\n  Height : {}\n  Sitewidth : 1\n  Sitespacing : 1\n  Siteorient : 1\n  Sitesymmetry : 1\n  SubrowOrigin : {} NumSites : {}\nEnd\n",
            fmt_coord(y),
            fmt_coord(row_height),
            fmt_coord(canvas.xl),
            sites
        );
    }
    out
}

/// Writes a full design (`.aux`, `.nodes`, `.nets`, `.pl`, `.scl`) into
/// `dir` using `base` as the file stem. Returns the `.aux` path.
pub fn write_design(design: &BookshelfDesign, dir: &Path, base: &str) -> Result<PathBuf> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let rh = design.row_height.unwrap_or(1.0);
    let files = [
        (
            format!("{base}.aux"),
            format!("RowBasedPlacement : {base}.nodes {base}.nets {base}.pl {base}.scl\n"),
        ),
        (format!("{base}.nodes"), format_nodes(design)),
        (format!("{base}.nets"), format_nets(design)),
        (format!("{base}.pl"), format_pl(design, &design.initial)),
        (format!("{base}.scl"), format_scl(&design.canvas, rh)),
    ];
    for (name, text) in &files {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(io(&path))?;
    }
    Ok(dir.join(format!("{base}.aux")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const NODES: &str = "UCLA nodes 1.0\n# comment\nNumNodes : 2\nNumTerminals : 1\n  o1 2 4\n  p1 1 1 terminal\n";
    const NETS: &str = "UCLA nets 1.0\nNumNets : 1\nNumPins : 2\nNetDegree : 2 n0\n  o1 I : -0.5 1.0\n  p1 O : 0 0\n";
    const PL: &str = "UCLA pl 1.0\n\no1 12 30 : N\np1 0 0 : N /FIXED\n";

    fn sources<'a>(nodes: &'a str, nets: &'a str, pl: &'a str) -> BookshelfSources<'a> {
        BookshelfSources {
            nodes: ("t.nodes", nodes),
            nets: ("t.nets", nets),
            pl: ("t.pl", pl),
            scl: None,
        }
    }

    #[test]
    fn terminal_suffix_makes_fixed_cell() {
        let d = parse_design(&sources(NODES, NETS, PL)).unwrap();
        let kinds: Vec<CellKind> = d.netlist.cells().iter().map(|c| c.kind).collect();
        assert_eq!(kinds, vec![CellKind::Movable, CellKind::Fixed]);
    }

    #[test]
    fn pin_offsets_become_lower_left_relative() {
        let d = parse_design(&sources(NODES, NETS, PL)).unwrap();
        let pin = d.netlist.nets()[0].pins[0];
        assert_eq!((pin.dx, pin.dy), (0.5, 3.0));
        let pin = d.netlist.nets()[0].pins[1];
        assert_eq!((pin.dx, pin.dy), (0.5, 0.5));
    }

    #[test]
    fn pl_lines_are_bit_exact() {
        let d = parse_design(&sources(NODES, NETS, PL)).unwrap();
        let text = format_pl(&d, &d.initial);
        let lines: Vec<&str> = text.lines().filter(|l| !l.is_empty()).collect();
        assert_eq!(lines, vec!["UCLA pl 1.0", "o1 12 30 : N", "p1 0 0 : N /FIXED"]);
        let mut moved = d.initial.clone();
        moved.set(0, Point::new(0.1, -2.5e-7));
        assert!(format_pl(&d, &moved).contains("o1 0.1 -0.00000025 : N\n"));
    }

    #[test]
    fn count_mismatch_is_reported() {
        let nodes = NODES.replace("NumNodes : 2", "NumNodes : 3");
        let err = parse_design(&sources(&nodes, NETS, PL)).unwrap_err();
        assert!(matches!(err, Error::CountMismatch { what: "nodes", declared: 3, found: 2, .. }));
        let nets = NETS.replace("NumPins : 2", "NumPins : 5");
        let err = parse_design(&sources(NODES, &nets, PL)).unwrap_err();
        assert!(matches!(err, Error::CountMismatch { what: "pins", .. }));
    }

    #[test]
    fn malformed_records_carry_line_numbers() {
        let nets = NETS.replace("p1 O : 0 0", "zz O : 0 0");
        match parse_design(&sources(NODES, &nets, PL)).unwrap_err() {
            Error::Parse { file, line, .. } => {
                assert_eq!(file, "t.nets");
                assert_eq!(line, 6);
            }
            e => panic!("unexpected {e}"),
        }
        let nodes = NODES.replace("o1 2 4", "o1 2 nan");
        assert!(matches!(parse_design(&sources(&nodes, NETS, PL)), Err(Error::Parse { line: 5, .. })));
        let nets = NETS.replace("NetDegree : 2", "NetDegree : 3");
        assert!(matches!(parse_design(&sources(NODES, &nets, PL)), Err(Error::Parse { .. })));
    }

    #[test]
    fn trailing_tokens_are_tolerated() {
        let pl = PL.replace("o1 12 30 : N", "o1 12 30 : N extra stuff");
        let d = parse_design(&sources(NODES, NETS, &pl)).unwrap();
        assert_eq!(d.initial.get(0), Point::new(12.0, 30.0));
    }

    #[test]
    fn canvas_from_cells_without_rows() {
        let d = parse_design(&sources(NODES, NETS, PL)).unwrap();
        assert_eq!((d.canvas.xl, d.canvas.yl, d.canvas.xh, d.canvas.yh), (0.0, 0.0, 14.0, 34.0));
        assert_eq!(d.canvas.grid_nx, 32);
        assert_eq!(d.row_height, None);
    }

    #[test]
    fn scl_rows_define_canvas() {
        let scl = "UCLA scl 1.0\nNumRows : 2\nCoreRow Horizontal\n Coordinate : 0\n Height : 12\n Sitewidth : 1\n Sitespacing : 1\n Siteorient : 1\n Sitesymmetry : 1\n SubrowOrigin : 5 NumSites : 100\nEnd\nCoreRow Horizontal\n Coordinate : 12\n Height : 12\n Sitewidth : 1\n Sitespacing : 1\n SubrowOrigin : 5 Numsites : 100\nEnd\n";
        let rows = parse_scl(scl, "t.scl").unwrap();
        assert_eq!(rows.row_height, Some(12.0));
        assert_eq!(rows.bounds, Some((5.0, 0.0, 105.0, 24.0)));
        assert!(matches!(
            parse_scl(&scl.replace("NumRows : 2", "NumRows : 3"), "t.scl"),
            Err(Error::CountMismatch { what: "rows", .. })
        ));
    }

    #[test]
    fn aux_lists_files() {
        let aux = parse_aux_text("RowBasedPlacement :  a.nodes a.nets a.wts a.pl a.scl\n", "a.aux", Path::new("/d")).unwrap();
        assert_eq!(aux.nodes, Path::new("/d/a.nodes"));
        assert_eq!(aux.scl.as_deref(), Some(Path::new("/d/a.scl")));
        assert!(parse_aux_text("Something : a.nodes\n", "a.aux", Path::new("")).is_err());
    }

    #[test]
    fn header_prefix_must_be_whole_word() {
        assert_eq!(header_value("NumNodes : 3", "NumNodes"), Some("3"));
        assert_eq!(header_value("NumNodes: 3", "NumNodes"), Some("3"));
        assert_eq!(header_value("NumNodesX 3 4", "NumNodes"), None);
    }
}
