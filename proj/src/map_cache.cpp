#include "sgq/map_cache.hpp"

namespace sgq {

MapCache::MapCache(std::filesystem::path directory, unsigned threads)
    : dir_(std::move(directory)), threads_(threads) {}

std::shared_ptr<const IntensityMap> MapCache::get(const BeamSpec& beam_in, const GridSpec& grid,
                                                  const QuadratureSpec& quad) {
    const BeamSpec beam = beam_in.aligned();
    const auto r = grid.r_grid();
    const auto z = grid.z_grid();
    const std::string key = intensity_map_key(beam, quad, r, z);

    std::lock_guard lock(mutex_);
    if (auto it = maps_.find(key); it != maps_.end()) return it->second;

    std::shared_ptr<const IntensityMap> map;
    const auto file = dir_.empty() ? std::filesystem::path{} : dir_ / ("map_" + key + ".txt");
    if (!file.empty() && std::filesystem::exists(file)) {
        auto loaded = std::make_shared<const IntensityMap>(IntensityMap::load(file));
        if (loaded->cache_key() == key) {
            map = std::move(loaded);
            ++disk_hits_;
        }
    }
    if (!map) {
        map = std::make_shared<const IntensityMap>(build_intensity_map(beam, r, z, quad, threads_));
        ++builds_;
        if (!file.empty()) {
            std::filesystem::create_directories(dir_);
            map->save(file);
        }
    }
    maps_.emplace(key, map);
    return map;
}

std::size_t MapCache::builds() const {
    std::lock_guard lock(mutex_);
    return builds_;
}

std::size_t MapCache::disk_hits() const {
    std::lock_guard lock(mutex_);
    return disk_hits_;
}

}  // namespace sgq
