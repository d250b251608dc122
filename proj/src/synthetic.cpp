// Copyright 2026 The cogent-sim Authors
// Licensed under the Apache License, Version 2.0. See LICENSE for terms.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "cogent/error.hpp"
#include "cogent/random.hpp"
#include "cogent/trace.hpp"

namespace cogent {
namespace {

struct Variant {
  ParamSet params;
  std::uint64_t size = 0;
  std::string format;
  std::optional<SimHash> simhash;
};

struct Group {
  std::string content_id;
  std::string key;
  Modality modality = Modality::Block;
  std::vector<Variant> variants;
};

// Image forms cycle through (format, linear scale); size factors roughly track
// relative encoded sizes.
struct ImageForm {
  std::string_view fmt;
  double scale;
  double size_factor;
};
constexpr std::array<ImageForm, 6> kImageForms = {{
    {"jpg", 1.0, 1.0},
    {"webp", 1.0, 0.7},
    {"jpg", 0.5, 0.25},
    {"webp", 0.5, 0.175},
    {"png", 1.0, 1.5},
    {"jpg", 0.25, 0.0625},
}};

SimHash random_code(Rng& rng) { return SimHash{rng.next(), rng.next()}; }

SimHash perturb(SimHash base, int bits, Rng& rng) {
  std::array<int, 128> idx{};
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < bits; ++i) {
    const auto j = static_cast<int>(i + rng.below(static_cast<std::uint64_t>(128 - i)));
    std::swap(idx[i], idx[j]);
    base = flip_bit(base, idx[i]);
  }
  return base;
}

void check_spec(const SyntheticSpec& spec) {
  if (spec.groups > spec.objects) throw ParameterError("content groups G must not exceed objects N");
  if (spec.requests > 0 && spec.groups == 0) throw ParameterError("at least one content group is required");
  if (!(spec.mean_interarrival_us > 0.0) || !std::isfinite(spec.mean_interarrival_us)) {
    throw ParameterError("mean inter-arrival must be positive");
  }
  if (!(spec.zipf_alpha >= 0.0) || !std::isfinite(spec.zipf_alpha)) throw ParameterError("zipf alpha must be >= 0");
  if (!(spec.image_fraction >= 0.0 && spec.image_fraction <= 1.0)) {
    throw ParameterError("image fraction must lie in [0, 1]");
  }
  if (spec.block_size == 0) throw ParameterError("block size must be positive");
  if (spec.image_size_min == 0 || spec.image_size_min > spec.image_size_max) {
    throw ParameterError("image size range must satisfy 0 < min <= max");
  }
  if (spec.intra_group_distance < 0 || spec.intra_group_distance > 128) {
    throw ParameterError("intra-group distance must lie in [0, 128]");
  }
  if (spec.match_threshold < 0 || spec.match_threshold > 128) {
    throw ParameterError("match threshold must lie in [0, 128]");
  }
  if (spec.match_threshold + spec.intra_group_distance >= 96) {
    throw ParameterError("match threshold plus intra-group distance leaves no room for distinct groups");
  }
}

std::vector<Group> build_groups(const SyntheticSpec& spec, Rng& rng) {
  std::vector<Group> groups(spec.groups);
  std::vector<SimHash> image_bases;
  // Pairwise group distance must exceed threshold + 2 * per-variant radius so
  // that every cross-group variant pair stays above the threshold.
  const int radius = spec.intra_group_distance / 2;
  const int min_base_distance = spec.match_threshold + 2 * radius;

  for (std::uint64_t g = 0; g < spec.groups; ++g) {
    Group& grp = groups[g];
    grp.content_id = "c" + std::to_string(g);
    grp.modality = rng.uniform() < spec.image_fraction ? Modality::Image : Modality::Block;
    const std::uint64_t count = spec.objects / spec.groups + (g < spec.objects % spec.groups ? 1 : 0);

    if (grp.modality == Modality::Block) {
      grp.key = grp.content_id + "/blk";
      const std::uint64_t total = spec.block_size;
      Variant whole;
      whole.params.set("off", std::uint64_t{0}).set("len", total);
      whole.size = total;
      whole.format = "raw";
      grp.variants.push_back(whole);
      // Remaining variants are consecutive chunks of a max(count-1, 2)-way split.
      const std::uint64_t pieces = std::max<std::uint64_t>(count > 0 ? count - 1 : 0, 2);
      const std::uint64_t chunk = std::max<std::uint64_t>(total / pieces, 1);
      for (std::uint64_t v = 1; v < count; ++v) {
        const std::uint64_t off = std::min((v - 1) * chunk, total - 1);
        const std::uint64_t len = (v - 1 == pieces - 1) ? total - off : std::min(chunk, total - off);
        Variant part;
        part.params.set("off", off).set("len", len);
        part.size = len;
        part.format = "raw";
        grp.variants.push_back(part);
      }
    } else {
      grp.key = grp.content_id + "/img";
      const std::uint64_t span = spec.image_size_max - spec.image_size_min + 1;
      const std::uint64_t base_size = spec.image_size_min + rng.below(span);
      SimHash base;
      bool distinct = false;
      while (!distinct) {
        base = random_code(rng);
        distinct = std::all_of(image_bases.begin(), image_bases.end(), [&](const SimHash& other) {
          return hamming_distance(base, other) > min_base_distance;
        });
      }
      image_bases.push_back(base);
      for (std::uint64_t v = 0; v < count; ++v) {
        const ImageForm& form = kImageForms[v % kImageForms.size()];
        // Forms repeat past the table; the quality tier keeps params distinct.
        const std::uint64_t tier = v / kImageForms.size();
        Variant var;
        var.params.set("w", static_cast<std::uint64_t>(std::llround(1920 * form.scale)))
            .set("h", static_cast<std::uint64_t>(std::llround(1080 * form.scale)))
            .set("fmt", form.fmt);
        if (tier > 0) var.params.set("q", tier);
        var.size = std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::llround(static_cast<double>(base_size) * form.size_factor)));
        var.format = std::string(form.fmt);
        var.simhash = perturb(base, radius, rng);
        grp.variants.push_back(std::move(var));
      }
    }
  }
  return groups;
}

}  // namespace

std::vector<RequestRecord> generate_synthetic_trace(const SyntheticSpec& spec) {
  check_spec(spec);
  std::vector<RequestRecord> out;
  if (spec.requests == 0) return out;

  Rng rng(spec.seed);
  const std::vector<Group> groups = build_groups(spec, rng);

  std::vector<double> cumulative(groups.size());
  double total = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    total += std::pow(static_cast<double>(g + 1), -spec.zipf_alpha);
    cumulative[g] = total;
  }

  out.reserve(spec.requests);
  double clock = 0.0;
  for (std::uint64_t i = 0; i < spec.requests; ++i) {
    const double u = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    const Group& grp = groups[static_cast<std::size_t>(it - cumulative.begin())];
    const Variant& var = grp.variants[rng.below(grp.variants.size())];

    RequestRecord r;
    r.timestamp_us = static_cast<std::uint64_t>(clock);
    r.key = grp.key;
    r.params = var.params;
    r.size = var.size;
    r.content_id = grp.content_id;
    r.modality = grp.modality;
    r.format = var.format;
    r.simhash = var.simhash;
    out.push_back(std::move(r));
    clock += rng.exponential(spec.mean_interarrival_us);
  }
  return out;
}

}  // namespace cogent
