#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "sgq/beamoptics.hpp"

namespace sgq {

// Shares propagated maps across scenarios. Keys hash (beam, quadrature, grid);
// with a directory set, maps are also read from and written to disk there.
class MapCache {
public:
    explicit MapCache(std::filesystem::path directory = {}, unsigned threads = 0);

    std::shared_ptr<const IntensityMap> get(const BeamSpec& beam, const GridSpec& grid, const QuadratureSpec& quad);

    std::size_t builds() const;
    std::size_t disk_hits() const;

private:
    std::filesystem::path dir_;
    unsigned threads_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<const IntensityMap>> maps_;
    std::size_t builds_ = 0;
    std::size_t disk_hits_ = 0;
};

}  // namespace sgq
