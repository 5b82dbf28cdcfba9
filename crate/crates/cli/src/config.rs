//! `--config FILE`: `flag = value` lines that stand in for command-line flags.

use std::path::Path;

/// Replaces `--config FILE` (or `--config=FILE`) with the flags the file
/// lists, placed right after the subcommand so explicit flags override them.
pub fn expand_config(mut argv: Vec<String>) -> Result<Vec<String>, String> {
    let Some(pos) = argv
        .iter()
        .position(|a| a == "--config" || a.starts_with("--config="))
    else {
        return Ok(argv);
    };
    let path = if let Some(p) = argv[pos].strip_prefix("--config=") {
        let p = p.to_string();
        argv.remove(pos);
        p
    } else {
        if pos + 1 >= argv.len() {
            return Err("--config needs a file path".into());
        }
        argv.remove(pos);
        argv.remove(pos)
    };
    let from_file = parse_file(Path::new(&path))?;
    let insert_at = argv
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map_or(argv.len(), |k| k + 2);
    argv.splice(insert_at..insert_at, from_file);
    Ok(argv)
}

fn parse_file(path: &Path) -> Result<Vec<String>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_lines(&text).map_err(|(line, msg)| format!("{}:{line}: {msg}", path.display()))
}

fn parse_lines(text: &str) -> Result<Vec<String>, (usize, String)> {
    let mut args = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err((k + 1, format!("expected `flag = value`, found `{line}`")));
        };
        let key = key.trim().trim_start_matches('-');
        if key.is_empty() || key == "config" {
            return Err((k + 1, format!("invalid flag name `{key}`")));
        }
        args.push(format!("--{key}"));
        args.push(value.trim().to_string());
    }
    Ok(args)
}
