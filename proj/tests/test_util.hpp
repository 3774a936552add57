#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "hitpredict/track.hpp"

namespace testutil {

inline hitpredict::TrackRecord record(std::string id, std::string title, std::string artist,
                                      int popularity) {
  hitpredict::TrackRecord r;
  r.track_id = std::move(id);
  r.title = std::move(title);
  r.artist = std::move(artist);
  r.popularity = popularity;
  r.release_year = 2019;
  r.danceability = 0.7;
  r.energy = 0.6;
  r.key = 5;
  r.loudness = -6.0;
  r.mode = 1;
  r.speechiness = 0.1;
  r.acousticness = 0.2;
  r.instrumentalness = 0.0;
  r.liveness = 0.1;
  r.valence = 0.5;
  r.tempo = 110.0;
  r.duration_ms = 200000;
  r.time_signature = 4;
  return r;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("hitpredict-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
