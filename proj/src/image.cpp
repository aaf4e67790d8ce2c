#include "leadsheet/image.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <cmath>
#include <fstream>

namespace leadsheet::image {

NormalizedImage preprocess_image(const std::filesystem::path& path, const PreprocessOptions& options) {
    cv::Mat raw = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
    if (raw.empty()) {
        if (!std::filesystem::exists(path)) throw UndecodableImageError("no such file: " + path.string());
        throw UndecodableImageError("cannot decode image: " + path.string());
    }
    return preprocess_image(raw, options);
}

NormalizedImage preprocess_image(const cv::Mat& input, const PreprocessOptions& options) {
    if (input.empty() || input.rows <= 0 || input.cols <= 0)
        throw DegenerateImageError("image has a zero dimension");

    cv::Mat gray;
    if (input.channels() == 1) {
        gray = input;
    } else if (input.channels() == 3) {
        cv::cvtColor(input, gray, cv::COLOR_BGR2GRAY);
    } else if (input.channels() == 4) {
        cv::cvtColor(input, gray, cv::COLOR_BGRA2GRAY);
    } else {
        throw UndecodableImageError("unsupported channel count " + std::to_string(input.channels()));
    }
    if (gray.depth() != CV_8U) {
        cv::Mat tmp;
        double scale = gray.depth() == CV_16U ? 1.0 / 257.0 : 255.0;
        gray.convertTo(tmp, CV_8U, scale);
        gray = tmp;
    }

    // Fit to height 128 keeping the aspect ratio; fall back to width 1000
    // with bottom padding when the result would be too wide.
    int content_w = static_cast<int>(std::lround(static_cast<double>(gray.cols) * kTargetHeight / gray.rows));
    int content_h = kTargetHeight;
    if (content_w > kTargetWidth) {
        content_w = kTargetWidth;
        content_h = static_cast<int>(std::lround(static_cast<double>(gray.rows) * kTargetWidth / gray.cols));
    }
    content_w = std::max(1, std::min(content_w, kTargetWidth));
    content_h = std::max(1, std::min(content_h, kTargetHeight));

    cv::Mat scaled;
    if (content_w == gray.cols && content_h == gray.rows) {
        scaled = gray;
    } else {
        int interp = content_w < gray.cols || content_h < gray.rows ? cv::INTER_AREA : cv::INTER_LINEAR;
        cv::resize(gray, scaled, cv::Size(content_w, content_h), 0, 0, interp);
    }
    if (options.binarize) {
        cv::Mat bin;
        cv::threshold(scaled, bin, 0, 255, cv::THRESH_BINARY | cv::THRESH_OTSU);
        scaled = bin;
    }

    NormalizedImage out;
    out.content_width = content_w;
    out.content_height = content_h;
    out.pixels.assign(static_cast<size_t>(kTargetHeight) * kTargetWidth, 1.0f); // white padding
    for (int r = 0; r < content_h; ++r) {
        const uchar* src = scaled.ptr<uchar>(r);
        float* dst = out.pixels.data() + static_cast<size_t>(r) * kTargetWidth;
        for (int c = 0; c < content_w; ++c) dst[c] = static_cast<float>(src[c]) / 255.0f;
    }
    return out;
}

cv::Mat to_mat(const NormalizedImage& img) {
    cv::Mat m(img.height, img.width, CV_8UC1);
    for (int r = 0; r < img.height; ++r) {
        uchar* dst = m.ptr<uchar>(r);
        for (int c = 0; c < img.width; ++c)
            dst[c] = static_cast<uchar>(std::lround(img.at(r, c) * 255.0f));
    }
    return m;
}

void save_npy(const NormalizedImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': (1, " + std::to_string(img.height) +
                         ", " + std::to_string(img.width) + "), }";
    // pad so that magic + version + length + header is a multiple of 64
    size_t unpadded = 6 + 2 + 2 + header.size() + 1;
    header += std::string((64 - unpadded % 64) % 64, ' ');
    header += '\n';
    const char magic[] = "\x93NUMPY\x01\x00";
    out.write(magic, 8);
    auto len = static_cast<std::uint16_t>(header.size());
    out.put(static_cast<char>(len & 0xff));
    out.put(static_cast<char>(len >> 8));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size() * sizeof(float)));
}

} // namespace leadsheet::image
