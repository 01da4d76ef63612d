#pragma once

// favstego command-line front end. `run` is stream-parameterized so the test
// suite can drive every subcommand in-process.
//
// Exit codes: 0 success, 1 operational failure, 2 usage error, 3 I/O error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "digest.hpp"
#include "favstego/favstego.hpp"

namespace favstego::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kIoError = 3 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using json = nlohmann::json;
namespace fs = std::filesystem;

inline Bytes read_file(const std::string& path, std::istream& in) {
  if (path == "-") return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  Bytes data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (f.bad()) throw IoError("read error on '" + path + "'");
  return data;
}

inline void write_file(const std::string& path, ByteView data, std::ostream& out) {
  if (path == "-") {
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    out.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!f) throw IoError("write error on '" + path + "'");
}

inline void write_text(const std::string& path, const std::string& text) {
  write_file(path, ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()), std::cout);
}

inline IcoFile load_ico(const std::string& path, std::istream& in) { return parse_ico(read_file(path, in)); }

inline EntrySelection parse_entry_flag(const std::string& flag) {
  if (flag == "largest") return EntrySelection::largest();
  if (flag == "all") return EntrySelection::all();
  if (!flag.empty() && std::all_of(flag.begin(), flag.end(), [](unsigned char c) { return std::isdigit(c); }))
    return EntrySelection::single(std::stoul(flag));
  throw UsageError("--entry expects an index, 'all' or 'largest' (got '" + flag + "')");
}

inline SanitizeMode parse_mode_flag(const std::string& flag) {
  if (flag == "randomize_lsb" || flag == "randomize") return SanitizeMode::RandomizeLsb;
  if (flag == "normalize_extremes" || flag == "normalize") return SanitizeMode::NormalizeExtremes;
  if (flag == "both") return SanitizeMode::Both;
  throw UsageError("--mode expects randomize_lsb, normalize_extremes or both (got '" + flag + "')");
}

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json to_json(const CapacityReport& r) {
  json entries = json::array();
  for (const auto& e : r.per_entry)
    entries.push_back({{"entry_index", e.entry_index},
                       {"width", e.width},
                       {"height", e.height},
                       {"eligible_pixels", e.eligible_pixels},
                       {"eligible_fraction", e.eligible_fraction}});
  return {{"per_entry", entries},
          {"total_eligible_bits", r.total_eligible_bits},
          {"gross_capacity_bytes", r.gross_capacity_bytes},
          {"net_capacity_bytes", r.net_capacity_bytes}};
}

inline json to_json(const CoverDiffReport& r) {
  json listed = json::array();
  for (const auto& d : r.diff_pixel_indices) listed.push_back({{"entry_index", d.entry_index}, {"pixel_index", d.pixel_index}});
  return {{"dimensions_match", r.dimensions_match},
          {"entries_compared", r.entries_compared},
          {"alpha_lsb_diff_count", r.alpha_lsb_diff_count},
          {"alpha_other_diff_count", r.alpha_other_diff_count},
          {"rgb_diff_count", r.rgb_diff_count},
          {"diff_pixel_total", r.diff_pixel_total},
          {"diff_pixel_indices", listed}};
}

inline json to_json(const DetectionReport& r) {
  json entries = json::array();
  for (const auto& e : r.per_entry)
    entries.push_back({{"entry_index", e.entry_index},
                       {"eligible_pixels", e.eligible_pixels},
                       {"lsb_entropy_bits", optional_number(e.lsb_entropy_bits)},
                       {"chi_square_stat", optional_number(e.chi_square_stat)},
                       {"chi_square_p", optional_number(e.chi_square_p)},
                       {"magic_found", e.magic_found},
                       {"frame_plausible", e.frame_plausible}});
  json j = {{"per_entry", entries}, {"verdict", std::string(to_string(r.verdict))}};
  if (r.cover_diff) j["cover_diff"] = to_json(*r.cover_diff);
  return j;
}

inline std::string format_optional(const std::optional<double>& v, int precision = 4) {
  if (!v) return "n/a";
  std::ostringstream s;
  s << std::setprecision(precision) << *v;
  return s.str();
}

inline std::string geometry(const IcoFile& file, std::size_t i) {
  const IcoEntry& e = file.entries[i];
  return std::to_string(e.width_px) + "x" + std::to_string(e.height_px) + " " +
         std::string(to_string(e.frame_format()));
}

inline std::vector<std::string> collect_icons(const std::string& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) throw IoError("no such file or directory: '" + path + "'");
  if (!fs::is_directory(path, ec)) return {path};
  std::vector<std::string> files;
  for (auto it = fs::recursive_directory_iterator(path, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    std::string ext = it->path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".ico") files.push_back(it->path().string());
  }
  if (ec) throw IoError("cannot scan directory '" + path + "': " + ec.message());
  std::sort(files.begin(), files.end());
  return files;
}

inline std::string demo_index_html() {
  return R"html(<!doctype html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>favstego demo</title>
<link rel="icon" href="favicon.ico" type="image/x-icon">
<meta name="favstego-manifest" content="manifest.json">
<meta name="favstego-icon" content="favicon.ico">
</head>
<body>
<h1>favstego two-stage delivery demo</h1>
<p>The payload below is recovered from the alpha channel of this page's favicon.
It is displayed, not executed, unless you press the button and its digest matches the manifest.</p>
<p id="favstego-status">extracting&hellip;</p>
<pre id="favstego-payload"></pre>
<p>SHA-256: <code id="favstego-digest"></code></p>
<button id="favstego-execute" type="button" disabled>Execute payload (opt-in)</button>
<script type="module" src="extractor.js"></script>
</body>
</html>
)html";
}

struct Context {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

inline int cmd_embed(Context& ctx, const std::string& cover_path, const std::string& payload_path,
                     const std::string& out_path, const std::string& entry_flag, bool as_json) {
  const EmbedOptions options{parse_entry_flag(entry_flag)};
  const IcoFile cover = load_ico(cover_path, ctx.in);
  const Bytes payload = read_file(payload_path, ctx.in);
  const EmbedResult result = embed_with_summary(cover, payload, options);
  write_file(out_path, serialize_ico(result.file), ctx.out);

  const EmbedSummary& s = result.summary;
  if (as_json) {
    ctx.out << json{{"entries_used", s.entries_used},
                    {"bits_written", s.bits_written},
                    {"slack_bits", s.slack_bits},
                    {"payload_bytes", s.payload_bytes},
                    {"stored_body_bytes", s.stored_body_bytes},
                    {"compressed", s.compressed}}
                   .dump()
            << "\n";
  } else {
    std::ostream& o = out_path == "-" ? ctx.err : ctx.out;
    o << "entry used:";
    for (std::size_t i : s.entries_used) o << " " << i << " (" << geometry(cover, i) << ")";
    o << "\nbits written: " << s.bits_written << "\nslack bits remaining: " << s.slack_bits
      << "\npayload bytes: " << s.payload_bytes << " (stored body " << s.stored_body_bytes << ")"
      << "\ncompressed: " << (s.compressed ? "yes" : "no") << "\n";
  }
  return kOk;
}

/// Writes the recovered bytes; never interprets or runs them.
inline int cmd_extract(Context& ctx, const std::string& stego_path, const std::string& out_path,
                       const std::string& entry_flag) {
  const EmbedOptions options{parse_entry_flag(entry_flag)};
  const Bytes payload = extract(load_ico(stego_path, ctx.in), options);
  write_file(out_path, payload, ctx.out);
  if (out_path != "-") ctx.out << "extracted " << payload.size() << " bytes to " << out_path << "\n";
  return kOk;
}

inline int cmd_capacity(Context& ctx, const std::string& path, const std::string& entry_flag, bool as_json) {
  const EmbedOptions options{parse_entry_flag(entry_flag)};
  const CapacityReport r = capacity(load_ico(path, ctx.in), options);
  if (as_json) {
    json j = to_json(r);
    j["path"] = path;
    j["entry_selection"] = to_string(options.entry_selection);
    ctx.out << j.dump() << "\n";
    return kOk;
  }
  for (const auto& e : r.per_entry)
    ctx.out << "entry " << e.entry_index << ": " << e.width << "x" << e.height << ", " << e.eligible_pixels
            << " eligible pixels (" << std::fixed << std::setprecision(1) << 100.0 * e.eligible_fraction
            << "%)\n"
            << std::defaultfloat;
  ctx.out << "total eligible bits: " << r.total_eligible_bits << "\n"
          << "gross capacity: " << r.gross_capacity_bytes << " bytes\n"
          << "net capacity: " << r.net_capacity_bytes << " bytes\n";
  return kOk;
}

inline int cmd_detect(Context& ctx, const std::string& target, const std::string& cover_path, bool as_json,
                      const DetectorThresholds& thresholds) {
  std::optional<IcoFile> cover;
  if (!cover_path.empty()) cover = load_ico(cover_path, ctx.in);
  const auto files = collect_icons(target);
  bool flagged = false;
  for (const auto& path : files) {
    json record = {{"path", path}};
    try {
      const DetectionReport r = detect(load_ico(path, ctx.in), cover ? &*cover : nullptr, thresholds);
      record.update(to_json(r));
      flagged = flagged || r.verdict != Verdict::Clean;
      if (!as_json) {
        ctx.out << path << ": " << to_string(r.verdict) << "\n";
        for (const auto& e : r.per_entry)
          ctx.out << "  entry " << e.entry_index << ": eligible=" << e.eligible_pixels
                  << " entropy=" << format_optional(e.lsb_entropy_bits)
                  << " chi2=" << format_optional(e.chi_square_stat) << " p=" << format_optional(e.chi_square_p)
                  << " magic=" << (e.magic_found ? "yes" : "no")
                  << " plausible=" << (e.frame_plausible ? "yes" : "no") << "\n";
        if (r.cover_diff)
          ctx.out << "  cover diff: alpha_lsb=" << r.cover_diff->alpha_lsb_diff_count
                  << " alpha_other=" << r.cover_diff->alpha_other_diff_count
                  << " rgb=" << r.cover_diff->rgb_diff_count
                  << " dimensions_match=" << (r.cover_diff->dimensions_match ? "yes" : "no") << "\n";
      }
    } catch (const Error& e) {
      flagged = true;
      record["verdict"] = nullptr;
      record["error"] = e.what();
      if (!as_json) ctx.out << path << ": error: " << e.what() << "\n";
    }
    if (as_json) ctx.out << record.dump() << "\n";
  }
  return flagged ? kFailure : kOk;
}

inline int cmd_sanitize(Context& ctx, const std::string& in_path, const std::string& out_path,
                        const std::string& mode_flag, std::optional<std::uint64_t> seed, bool as_json) {
  const SanitizeOptions options{parse_mode_flag(mode_flag), seed};
  const IcoFile clean = sanitize(load_ico(in_path, ctx.in), options);
  write_file(out_path, serialize_ico(clean), ctx.out);
  const NeutralizationCheck check = verify_neutralized(clean);
  if (as_json) {
    ctx.out << json{{"mode", std::string(to_string(options.mode))},
                    {"neutralized", check.neutralized},
                    {"reason", check.reason}}
                   .dump()
            << "\n";
  } else {
    std::ostream& o = out_path == "-" ? ctx.err : ctx.out;
    o << "mode: " << to_string(options.mode) << "\nneutralized: " << (check.neutralized ? "yes" : "no") << " ("
      << check.reason << ")\n";
  }
  return check.neutralized ? kOk : kFailure;
}

inline int cmd_gen_demo(Context& ctx, const std::string& stego_path, const std::string& out_dir,
                        const std::string& bundle_flag, const std::string& entry_flag) {
  std::string bundle = bundle_flag;
  if (bundle.empty()) {
    if (const char* env = std::getenv("FAVSTEGO_EXTRACTOR_BUNDLE")) bundle = env;
  }
  if (bundle.empty())
    throw UsageError("gen-demo needs the browser extractor bundle: pass --bundle <file.js> or set "
                     "FAVSTEGO_EXTRACTOR_BUNDLE");
  const EmbedOptions options{parse_entry_flag(entry_flag)};

  const Bytes ico_bytes = read_file(stego_path, ctx.in);
  const Bytes bundle_bytes = read_file(bundle, ctx.in);
  const IcoFile file = parse_ico(ico_bytes);
  const Bytes stream = harvest_stream(file, options);
  const Bytes payload = frame_decode(stream);
  const FrameHeader header = read_frame_header(stream);

  json entries = json::array();
  for (std::size_t i : selected_entries(file, options.entry_selection)) {
    const IcoEntry& e = file.entries[i];
    entries.push_back({{"index", i},
                       {"width", e.width_px},
                       {"height", e.height_px},
                       {"format", std::string(to_string(e.frame_format()))}});
  }
  const json manifest = {{"format", "favstego-demo-manifest"},
                         {"version", 1},
                         {"favicon", "favicon.ico"},
                         {"entry_selection", to_string(options.entry_selection)},
                         {"entries", entries},
                         {"frame_flags", header.flags},
                         {"payload_length", payload.size()},
                         {"payload_sha256", sha256_hex(payload)}};

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());
  const fs::path dir(out_dir);
  write_file((dir / "favicon.ico").string(), ico_bytes, ctx.out);
  write_file((dir / "extractor.js").string(), bundle_bytes, ctx.out);
  write_text((dir / "index.html").string(), demo_index_html());
  write_text((dir / "manifest.json").string(), manifest.dump(2) + "\n");
  ctx.out << "demo written to " << out_dir << " (payload " << payload.size() << " bytes, sha256 "
          << manifest["payload_sha256"].get<std::string>() << ")\n";
  return kOk;
}

inline int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"favstego: ICO alpha-channel steganography toolkit (embed, extract, analyse, sanitize)"};
  app.name("favstego");
  app.require_subcommand(1);

  std::string entry = "largest";
  bool as_json = false;
  std::string out_path;

  auto* embed_cmd = app.add_subcommand("embed", "Hide a payload in the alpha LSBs of an icon");
  std::string cover_path, payload_path;
  embed_cmd->add_option("cover", cover_path, "Cover .ico")->required();
  embed_cmd->add_option("payload", payload_path, "Payload file ('-' for stdin)")->required();
  embed_cmd->add_option("-o,--out", out_path, "Output .ico ('-' for stdout)")->required();
  embed_cmd->add_option("--entry", entry, "Entry index, 'all' or 'largest'");
  embed_cmd->add_flag("--json", as_json, "Machine-readable summary");

  auto* extract_cmd = app.add_subcommand("extract", "Recover a payload (written to a file, never executed)");
  std::string stego_path;
  extract_cmd->add_option("stego", stego_path, "Stego .ico")->required();
  extract_cmd->add_option("-o,--out", out_path, "Output file ('-' for stdout)")->default_val("-");
  extract_cmd->add_option("--entry", entry, "Entry index, 'all' or 'largest'");

  auto* capacity_cmd = app.add_subcommand("capacity", "Report embeddable capacity");
  std::string capacity_path;
  capacity_cmd->add_option("path", capacity_path, "Icon .ico")->required();
  capacity_cmd->add_option("--entry", entry, "Entry index, 'all' or 'largest'");
  capacity_cmd->add_flag("--json", as_json, "Machine-readable report");

  auto* detect_cmd = app.add_subcommand("detect", "Steganalysis of an icon or a directory of icons");
  std::string detect_target, detect_cover;
  DetectorThresholds thresholds;
  detect_cmd->add_option("path", detect_target, "Icon file or directory (scanned recursively)")->required();
  detect_cmd->add_option("--cover", detect_cover, "Known original for pixel comparison");
  detect_cmd->add_flag("--json", as_json, "One JSON record per file");
  detect_cmd->add_option("--min-entropy", thresholds.min_entropy, "Entropy threshold")->capture_default_str();
  detect_cmd->add_option("--min-p", thresholds.min_p_value, "Chi-square p-value threshold")->capture_default_str();
  detect_cmd->add_option("--min-eligible", thresholds.min_eligible_pixels, "Minimum eligible pixels")
      ->capture_default_str();

  auto* sanitize_cmd = app.add_subcommand("sanitize", "Neutralize any alpha-LSB payload");
  std::string sanitize_in, mode = "both";
  std::optional<std::uint64_t> seed;
  sanitize_cmd->add_option("input", sanitize_in, "Input .ico")->required();
  sanitize_cmd->add_option("-o,--out", out_path, "Output .ico ('-' for stdout)")->required();
  sanitize_cmd->add_option("--mode", mode, "randomize_lsb | normalize_extremes | both")->capture_default_str();
  sanitize_cmd->add_option("--seed", seed, "RNG seed for reproducible output");
  sanitize_cmd->add_flag("--json", as_json, "Machine-readable result");

  auto* demo_cmd = app.add_subcommand("gen-demo", "Write a static browser demo site around a stego icon");
  std::string demo_ico, bundle;
  demo_cmd->add_option("stego", demo_ico, "Stego .ico")->required();
  demo_cmd->add_option("-o,--out", out_path, "Output directory")->required();
  demo_cmd->add_option("--bundle", bundle, "Browser extractor bundle (JavaScript)");
  demo_cmd->add_option("--entry", entry, "Entry index, 'all' or 'largest'");

  std::vector<std::string> argv_store;
  argv_store.push_back("favstego");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kUsage;
  }

  Context ctx{in, out, err};
  try {
    if (*embed_cmd) return cmd_embed(ctx, cover_path, payload_path, out_path, entry, as_json);
    if (*extract_cmd) return cmd_extract(ctx, stego_path, out_path, entry);
    if (*capacity_cmd) return cmd_capacity(ctx, capacity_path, entry, as_json);
    if (*detect_cmd) return cmd_detect(ctx, detect_target, detect_cover, as_json, thresholds);
    if (*sanitize_cmd) return cmd_sanitize(ctx, sanitize_in, out_path, mode, seed, as_json);
    if (*demo_cmd) return cmd_gen_demo(ctx, demo_ico, out_path, bundle, entry);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidOption) {
      err << "usage error: " << e.what() << "\n";
      return kUsage;
    }
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace favstego::cli
