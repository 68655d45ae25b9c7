// Regenerates the bundled synthetic corpora.
#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "hgmem/errors.hpp"
#include "hgmem/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write the synthetic smoke, golden and scaling corpora"};
  std::string out = "fixtures";
  app.add_option("--out", out, "Destination directory")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    const std::filesystem::path root(out);
    hgmem::harness::write_corpus(hgmem::synthetic::smoke().corpus, root / "smoke");
    hgmem::harness::write_corpus(hgmem::synthetic::golden().corpus, root / "golden");
    hgmem::harness::write_corpus(hgmem::synthetic::scaling().corpus, root / "scaling");
  } catch (const hgmem::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
