#include "bmp/image.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "bmp/atomic_file.hpp"
#include "bmp/error.hpp"

namespace bmp {

namespace {

std::string next_token(std::istream& is) {
  std::string tok;
  while (is >> tok) {
    if (tok[0] == '#') {
      std::string rest;
      std::getline(is, rest);
      continue;
    }
    return tok;
  }
  fail(ErrorCode::FormatError, "truncated netpbm header");
}

int parse_int(const std::string& s) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::FormatError, "bad netpbm header field '" + s + "'");
  }
}

}  // namespace

Image read_netpbm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoError, "cannot open image " + path.string());
  const std::string magic = next_token(is);
  int w = 0, h = 0, c = 0, maxval = 0;
  if (magic == "P5" || magic == "P6") {
    w = parse_int(next_token(is));
    h = parse_int(next_token(is));
    maxval = parse_int(next_token(is));
    c = magic == "P5" ? 1 : 3;
  } else if (magic == "P7") {
    std::string tupltype;
    for (std::string key = next_token(is); key != "ENDHDR"; key = next_token(is)) {
      if (key == "WIDTH") w = parse_int(next_token(is));
      else if (key == "HEIGHT") h = parse_int(next_token(is));
      else if (key == "DEPTH") c = parse_int(next_token(is));
      else if (key == "MAXVAL") maxval = parse_int(next_token(is));
      else if (key == "TUPLTYPE") tupltype = next_token(is);
      else fail(ErrorCode::FormatError, "unknown PAM header key " + key);
    }
    if (c != 1 && c != 3 && c != 4) fail(ErrorCode::FormatError, "unsupported PAM depth");
  } else {
    fail(ErrorCode::FormatError, "not a P5/P6/P7 netpbm file: " + path.string());
  }
  if (maxval != 255) fail(ErrorCode::FormatError, "only maxval 255 is supported");
  if (w <= 0 || h <= 0 || w > 1 << 15 || h > 1 << 15) fail(ErrorCode::FormatError, "bad image dimensions");
  is.get();  // single whitespace after the header
  Image img(w, h, c);
  if (!is.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size())))
    fail(ErrorCode::FormatError, "truncated image payload in " + path.string());
  return img;
}

void write_netpbm(const Image& image, const std::filesystem::path& path) {
  std::ostringstream header;
  if (image.channels == 1) {
    header << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  } else if (image.channels == 3) {
    header << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  } else if (image.channels == 4) {
    header << "P7\nWIDTH " << image.width << "\nHEIGHT " << image.height
           << "\nDEPTH 4\nMAXVAL 255\nTUPLTYPE RGB_ALPHA\nENDHDR\n";
  } else {
    fail(ErrorCode::FormatError, "unsupported channel count for netpbm output");
  }
  write_file_atomically(path, [&](std::ostream& os) {
    os << header.str();
    os.write(reinterpret_cast<const char*>(image.data.data()), static_cast<std::streamsize>(image.data.size()));
  });
}

}  // namespace bmp
