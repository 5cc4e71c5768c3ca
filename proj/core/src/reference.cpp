// SPDX-License-Identifier: Apache-2.0
#include "tsd/reference.hpp"

#include <sstream>

namespace tsd {

namespace {

std::vector<ReferenceRow> build_rows() {
    std::vector<ReferenceRow> r;
    struct MultiRow {
        const char* dataset;
        std::size_t horizon;
        // TSD, Autoformer, Informer, LogTrans, Reformer, LSTNet, LSTM
        double v[14];
    };
    static const MultiRow t1[] = {
        {"etth1", 24, {0.115, 0.285, 0.384, 0.425, 0.577, 0.549, 0.686, 0.604, 0.991, 0.754, 1.293, 0.901, 0.650, 0.624}},
        {"etth1", 48, {0.119, 0.279, 0.392, 0.419, 0.685, 0.625, 0.766, 0.757, 1.313, 0.906, 1.456, 0.960, 0.702, 0.675}},
        {"etth1", 168, {0.191, 0.313, 0.490, 0.481, 0.931, 0.752, 1.002, 0.846, 1.824, 1.138, 1.997, 1.214, 1.212, 0.867}},
        {"etth1", 336, {0.141, 0.285, 0.505, 0.484, 1.128, 0.873, 1.362, 0.952, 2.117, 1.280, 2.655, 1.369, 1.424, 0.994}},
        {"etth1", 720, {0.233, 0.416, 0.498, 0.500, 1.215, 0.896, 1.397, 1.291, 2.415, 1.520, 2.143, 1.380, 1.960, 1.322}},
        {"etth2", 24, {0.189, 0.270, 0.261, 0.341, 0.720, 0.665, 0.828, 0.750, 1.531, 1.613, 2.742, 1.457, 1.143, 0.813}},
        {"etth2", 48, {0.242, 0.538, 0.312, 0.373, 1.457, 1.001, 1.806, 1.034, 1.871, 1.735, 3.567, 1.687, 1.671, 1.221}},
        {"etth2", 168, {0.320, 0.493, 0.457, 0.455, 3.489, 1.515, 4.070, 1.681, 4.660, 1.846, 3.242, 2.513, 4.117, 1.674}},
        {"etth2", 336, {0.309, 0.462, 0.471, 0.475, 2.723, 1.340, 3.875, 1.763, 4.028, 1.688, 2.544, 2.591, 3.434, 1.549}},
        {"etth2", 720, {0.314, 0.472, 0.474, 0.484, 3.467, 1.473, 3.913, 1.552, 5.381, 2.015, 4.625, 3.709, 3.963, 1.788}},
        {"ettm1", 24, {0.145, 0.306, 0.383, 0.403, 0.323, 0.369, 0.419, 0.412, 0.724, 0.607, 1.968, 1.170, 0.621, 0.629}},
        {"ettm1", 48, {0.143, 0.293, 0.454, 0.453, 0.494, 0.503, 0.507, 0.583, 1.098, 0.777, 1.999, 1.215, 1.392, 0.939}},
        {"ettm1", 96, {0.268, 0.390, 0.481, 0.463, 0.678, 0.614, 0.768, 0.792, 1.433, 0.945, 2.762, 1.542, 1.339, 0.913}},
        {"ettm1", 288, {0.157, 0.316, 0.634, 0.528, 1.056, 0.786, 1.462, 1.320, 1.820, 1.094, 1.257, 2.076, 1.740, 1.124}},
        {"ettm1", 672, {0.149, 0.313, 0.606, 0.542, 1.192, 0.926, 1.669, 1.461, 2.187, 1.232, 1.917, 2.941, 2.736, 1.555}},
        {"exchange", 96, {0.184, 0.369, 0.197, 0.323, 0.847, 0.752, 0.968, 0.812, 1.065, 0.829, 1.551, 1.058, 1.453, 1.049}},
        {"exchange", 192, {0.262, 0.445, 0.300, 0.369, 1.204, 0.895, 1.040, 0.851, 1.188, 0.906, 1.477, 1.028, 1.846, 1.179}},
        {"exchange", 336, {0.293, 0.422, 0.509, 0.524, 1.672, 1.036, 1.659, 1.081, 1.357, 0.976, 1.507, 1.031, 2.136, 1.231}},
        {"exchange", 720, {1.307, 0.758, 1.447, 0.941, 2.478, 1.310, 1.941, 1.127, 1.510, 1.016, 2.285, 1.243, 2.984, 1.427}},
        {"ili", 24, {1.514, 1.103, 3.483, 1.287, 5.764, 1.677, 4.480, 1.444, 4.400, 1.382, 6.026, 1.770, 5.914, 1.734}},
        {"ili", 36, {1.449, 1.086, 3.103, 1.148, 4.755, 1.467, 4.799, 1.467, 4.783, 1.448, 5.340, 1.668, 6.631, 1.845}},
        {"ili", 48, {1.186, 0.971, 2.669, 1.085, 4.763, 1.469, 4.800, 1.468, 4.832, 1.465, 6.080, 1.787, 6.736, 1.857}},
        {"ili", 60, {1.140, 0.946, 2.770, 1.125, 5.264, 1.564, 5.278, 1.560, 4.882, 1.483, 5.548, 1.720, 6.870, 1.879}},
    };
    static const char* t1_models[] = {"TSD", "Autoformer", "Informer", "LogTrans",
                                      "Reformer", "LSTNet", "LSTM"};
    for (const auto& row : t1)
        for (int m = 0; m < 7; ++m)
            r.push_back({row.dataset, "multivariate", row.horizon, t1_models[m],
                         row.v[2 * m], row.v[2 * m + 1], "paper-table-1"});

    struct UniRow {
        const char* dataset;
        std::size_t horizon;
        // TSD, Informer, Reformer, LogTrans, DeepAR, Yformer, QuerySelector
        double v[14];
    };
    static const UniRow t2[] = {
        {"etth1", 24, {0.018, 0.102, 0.098, 0.247, 0.222, 0.389, 0.103, 0.259, 0.107, 0.280, 0.082, 0.230, 0.043, 0.161}},
        {"etth1", 48, {0.043, 0.166, 0.158, 0.319, 0.284, 0.445, 0.167, 0.328, 0.162, 0.327, 0.139, 0.308, 0.072, 0.211}},
        {"etth1", 168, {0.082, 0.225, 0.183, 0.346, 1.522, 1.191, 0.207, 0.375, 0.239, 0.422, 0.111, 0.268, 0.093, 0.237}},
        {"etth1", 336, {0.094, 0.237, 0.222, 0.387, 1.860, 1.124, 0.230, 0.398, 0.445, 0.552, 0.195, 0.365, 0.126, 0.284}},
        {"etth1", 720, {0.129, 0.291, 0.269, 0.435, 2.112, 1.436, 0.273, 0.463, 0.658, 0.707, 0.226, 0.394, 0.213, 0.373}},
        {"ettm1", 24, {0.011, 0.082, 0.030, 0.137, 0.095, 0.228, 0.065, 0.202, 0.091, 0.243, 0.024, 0.118, 0.013, 0.087}},
        {"ettm1", 48, {0.019, 0.110, 0.069, 0.203, 0.249, 0.390, 0.078, 0.220, 0.219, 0.362, 0.048, 0.173, 0.034, 0.140}},
        {"ettm1", 96, {0.038, 0.161, 0.194, 0.372, 0.920, 0.767, 0.199, 0.386, 0.364, 0.496, 0.143, 0.311, 0.070, 0.210}},
        {"ettm1", 288, {0.057, 0.199, 0.401, 0.554, 1.108, 1.245, 0.411, 0.572, 0.948, 0.795, 0.150, 0.316, 0.154, 0.324}},
        {"ettm1", 672, {0.341, 1.052, 0.512, 0.644, 1.793, 1.528, 0.598, 0.702, 2.437, 1.352, 0.305, 0.476, 0.173, 0.342}},
        {"etth2", 24, {0.075, 0.210, 0.093, 0.240, 0.263, 0.437, 0.102, 0.255, 0.098, 0.263, 0.082, 0.221, 0.084, 0.223}},
        {"etth2", 48, {0.073, 0.213, 0.155, 0.314, 0.458, 0.545, 0.169, 0.348, 0.163, 0.341, 0.139, 0.334, 0.111, 0.262}},
        {"etth2", 168, {0.110, 0.270, 0.232, 0.389, 1.029, 0.879, 0.246, 0.422, 0.255, 0.414, 0.111, 0.337, 0.175, 0.332}},
        {"etth2", 336, {0.121, 0.273, 0.263, 0.417, 1.668, 1.228, 0.267, 0.437, 0.604, 0.607, 0.195, 0.391, 0.208, 0.371}},
        {"etth2", 720, {0.123, 0.273, 0.277, 0.431, 2.030, 1.721, 0.303, 0.493, 0.429, 0.580, 0.226, 0.382, 0.258, 0.413}},
    };
    static const char* t2_models[] = {"TSD", "Informer", "Reformer", "LogTrans",
                                      "DeepAR", "Yformer", "QuerySelector"};
    for (const auto& row : t2)
        for (int m = 0; m < 7; ++m)
            r.push_back({row.dataset, "univariate", row.horizon, t2_models[m],
                         row.v[2 * m], row.v[2 * m + 1], "paper-table-2"});

    struct PoolRow {
        const char* dataset;
        std::size_t horizon;
        double max_mse, max_mae, avg_mse, avg_mae;
    };
    static const PoolRow t3[] = {
        {"ili", 24, 1.514, 1.103, 1.577, 1.108},
        {"ili", 36, 1.449, 1.086, 1.429, 1.042},
        {"ili", 48, 1.186, 0.971, 1.239, 0.962},
        {"ili", 60, 1.140, 0.946, 1.146, 0.947},
        {"exchange", 96, 0.184, 0.369, 0.985, 1.263},
        {"exchange", 192, 0.262, 0.445, 0.347, 0.453},
        {"exchange", 336, 0.293, 0.422, 0.455, 0.513},
        {"exchange", 720, 1.307, 0.758, 1.620, 1.787},
    };
    for (const auto& row : t3) {
        r.push_back({row.dataset, "multivariate", row.horizon, "TSD-maxpool",
                     row.max_mse, row.max_mae, "paper-table-3"});
        r.push_back({row.dataset, "multivariate", row.horizon, "TSD-averagepool",
                     row.avg_mse, row.avg_mae, "paper-table-3"});
    }

    struct BlockRow {
        const char* dataset;
        std::size_t horizon;
        double v[6];  // 3-block, 4-block, 5-block
    };
    static const BlockRow t4[] = {
        {"ili", 24, {1.519, 1.081, 1.514, 1.103, 1.537, 1.107}},
        {"ili", 36, {1.396, 1.080, 1.449, 1.086, 1.405, 1.128}},
        {"ili", 48, {1.224, 0.958, 1.186, 0.971, 1.278, 0.978}},
        {"ili", 60, {1.126, 0.924, 1.140, 0.946, 1.125, 0.930}},
        {"exchange", 96, {0.643, 1.442, 0.184, 0.369, 3.109, 1.406}},
        {"exchange", 192, {1.818, 1.676, 0.262, 0.445, 0.287, 0.458}},
        {"exchange", 336, {0.934, 1.343, 0.293, 0.422, 0.463, 0.494}},
        {"exchange", 720, {1.411, 0.937, 1.307, 0.758, 1.505, 1.040}},
    };
    static const char* t4_models[] = {"TSD-3blocks", "TSD-4blocks", "TSD-5blocks"};
    for (const auto& row : t4)
        for (int m = 0; m < 3; ++m)
            r.push_back({row.dataset, "multivariate", row.horizon, t4_models[m],
                         row.v[2 * m], row.v[2 * m + 1], "paper-table-4"});

    return r;
}

}  // namespace

const std::vector<ReferenceRow>& paper_reference_rows() {
    static const std::vector<ReferenceRow> rows = build_rows();
    return rows;
}

std::vector<ReferenceRow> reference_rows_for(const std::string& dataset,
                                             const std::string& mode,
                                             std::size_t horizon) {
    std::vector<ReferenceRow> out;
    for (const auto& r : paper_reference_rows())
        if (r.dataset == dataset && r.mode == mode && r.horizon == horizon)
            out.push_back(r);
    return out;
}

std::string reference_csv() {
    std::ostringstream os;
    os << "dataset,mode,horizon,model,mse,mae,source\n";
    for (const auto& r : paper_reference_rows())
        os << r.dataset << "," << r.mode << "," << r.horizon << "," << r.model
           << "," << r.mse << "," << r.mae << "," << r.source << "\n";
    return os.str();
}

}  // namespace tsd
