#pragma once

#include "leadsheet/error.hpp"

#include <opencv2/core.hpp>

#include <filesystem>
#include <vector>

namespace leadsheet::image {

class UndecodableImageError : public Error {
public:
    using Error::Error;
};
class DegenerateImageError : public Error {
public:
    using Error::Error;
};

inline constexpr int kTargetHeight = 128;
inline constexpr int kTargetWidth = 1000;

/// Model input tensor: one grayscale channel, 128x1000, values in [0,1].
/// Content sits top-left; the rest is white padding.
struct NormalizedImage {
    int channels = 1;
    int height = kTargetHeight;
    int width = kTargetWidth;
    int content_width = 0;
    int content_height = kTargetHeight; // < 128 only for over-wide inputs
    std::vector<float> pixels;          // row-major height*width

    float at(int row, int col) const { return pixels[static_cast<size_t>(row) * width + col]; }
};

struct PreprocessOptions {
    bool binarize = false; // Otsu threshold on the content region
};

/// Decodes, converts to grayscale, scales to height 128 preserving aspect
/// ratio, and right-pads with white to width 1000. Inputs too wide for
/// that geometry are fitted to width 1000 and bottom-padded instead.
NormalizedImage preprocess_image(const std::filesystem::path& path, const PreprocessOptions& options = {});
NormalizedImage preprocess_image(const cv::Mat& input, const PreprocessOptions& options = {});

/// 8-bit grayscale view of the normalized tensor, e.g. for cv::imwrite.
cv::Mat to_mat(const NormalizedImage& img);

/// float32 .npy with shape (1, 128, 1000), C order, little endian.
void save_npy(const NormalizedImage& img, const std::filesystem::path& path);

} // namespace leadsheet::image
