// Regenerates the meshes and textures under data/.
#include <filesystem>
#include <iostream>

#include "jigsaw3d/jigsaw3d.hpp"

int main(int argc, char** argv) {
  using namespace jigsaw3d;
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <dir>\n";
    return 2;
  }
  const std::filesystem::path dir(argv[1]);
  try {
    std::filesystem::create_directories(dir);
    save_mesh(dir / "cube.obj", make_uv_cube());
    save_mesh(dir / "sphere.obj", make_uv_sphere(48, 24));
    write_png(dir / "cube.png", checkerboard(512, 8, {0.15f, 0.2f, 0.25f}, {0.85f, 0.75f, 0.6f}), BitDepth::k8);
    write_png(dir / "sphere.png", value_noise(512, 4), BitDepth::k8);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
