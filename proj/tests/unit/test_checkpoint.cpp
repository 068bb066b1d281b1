#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ginv/checkpoint.hpp"
#include "ginv/errors.hpp"

using namespace ginv;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ginv_unit_checkpoint";
  fs::create_directories(dir);
  return dir / name;
}

Checkpoint sample() {
  Checkpoint c;
  c.task_hash = 0x0123456789abcdefULL;
  c.settings = {{"kind", "gin"}, {"hidden", 4}};
  PatternCode p;
  p.k = 3;
  p.topo_bits = 0b011;
  p.attrs[0] = 2;
  p.aut_count = 2;
  c.vocabulary.push_back(p);
  Mat a(2, 3);
  a << 1.0, -2.5, 3.25, 1e-300, -0.0, 7.0;
  c.tensors.emplace_back("enc.weight", a);
  c.tensors.emplace_back("enc.bias", Mat::Constant(1, 3, 0.1));
  return c;
}

}  // namespace

TEST(Checkpoint, RoundTripsExactly) {
  const auto path = temp_file("round.ckpt");
  const Checkpoint c = sample();
  save_checkpoint(path, c);
  const Checkpoint r = load_checkpoint(path);
  EXPECT_EQ(r.task_hash, c.task_hash);
  EXPECT_EQ(r.settings, c.settings);
  ASSERT_EQ(r.vocabulary.size(), 1u);
  EXPECT_EQ(r.vocabulary[0], c.vocabulary[0]);
  EXPECT_EQ(r.vocabulary[0].aut_count, 2u);
  ASSERT_EQ(r.tensors.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(r.tensors[i].first, c.tensors[i].first);
    ASSERT_EQ(r.tensors[i].second.rows(), c.tensors[i].second.rows());
    ASSERT_EQ(r.tensors[i].second.cols(), c.tensors[i].second.cols());
    EXPECT_TRUE((r.tensors[i].second.array() == c.tensors[i].second.array()).all());
  }
}

TEST(Checkpoint, CorruptionIsDetected) {
  const auto path = temp_file("corrupt.ckpt");
  save_checkpoint(path, sample());
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write = [&](const std::string& b) { std::ofstream(path, std::ios::binary | std::ios::trunc) << b; };

  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  write(flipped);
  EXPECT_THROW(load_checkpoint(path), DataError);

  write(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(load_checkpoint(path), DataError);

  std::string magic = bytes;
  magic[0] = 'X';
  write(magic);
  EXPECT_THROW(load_checkpoint(path), DataError);

  EXPECT_THROW(load_checkpoint(temp_file("missing.ckpt")), DataError);
}

TEST(Checkpoint, RestoreChecksNamesAndShapes) {
  const Checkpoint c = sample();
  Parameter w("enc.weight", Mat::Zero(2, 3)), b("enc.bias", Mat::Zero(1, 3));
  restore_parameters(c, {&w, &b});
  EXPECT_EQ(w.value(0, 2), 3.25);
  EXPECT_EQ(b.value(0, 1), 0.1);

  Parameter wrong_shape("enc.weight", Mat::Zero(3, 2));
  EXPECT_THROW(restore_parameters(c, {&wrong_shape}), DataError);
  Parameter missing("cls.weight", Mat::Zero(1, 1));
  EXPECT_THROW(restore_parameters(c, {&missing}), DataError);
}
