#ifndef EBL_FIELD_IO_HPP
#define EBL_FIELD_IO_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace ebl {

/// Flat binary field: magic "EBLFLD01", u64 rank, u64 dims[rank], f64 axis coordinates
/// (dims[0] + ... + dims[rank-1] values), then the row-major f64 payload.
struct FlatField {
  std::vector<std::vector<double>> axes;
  Eigen::ArrayXd data;
};

void write_flat_field(const std::string& path, const FlatField& f);
FlatField read_flat_field(const std::string& path);

}  // namespace ebl

#endif  // EBL_FIELD_IO_HPP
