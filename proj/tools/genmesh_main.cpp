#include "hyperfe2/meshgen.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace hyperfe2;

int main(int argc, char** argv)
{
    CLI::App app{ "Structured mesh generator" };

    std::string case_name = "rect";
    std::string type_name = "quad4";
    std::string output = "mesh.json";
    int nx = 4, ny = 4;
    double width = 1.0, height = 1.0;

    app.add_option("--case", case_name,
                   "rect | composite-cell (matrix 0, inclusions 1, pore hole)");
    app.add_option("--type", type_name, "tri3|tri6|quad4|quad8r");
    app.add_option("--nx", nx, "cells in x");
    app.add_option("--ny", ny, "cells in y");
    app.add_option("--width", width);
    app.add_option("--height", height);
    app.add_option("-o,--output", output, "output mesh file");
    CLI11_PARSE(app, argc, argv);

    try {
        const ElemType type = elem_type_from_name(type_name);
        Mesh mesh;
        if (case_name == "rect") {
            mesh = structured_mesh(type, nx, ny, width, height);
        } else if (case_name == "composite-cell") {
            // Stiff circular inclusions and one pore in a unit cell.
            const auto phases = circular_phases(
                {
                    { Vec2(0.30, 0.32), 0.16, 1 },
                    { Vec2(0.72, 0.70), 0.14, 1 },
                    { Vec2(0.68, 0.22), 0.10, 1 },
                    { Vec2(0.28, 0.74), 0.11, -1 },
                },
                0);
            mesh = structured_mesh(type, nx, ny, width, height, phases);
        } else {
            std::cerr << "unknown case '" << case_name << "'\n";
            return 1;
        }
        save_mesh(mesh, output);
        std::cout << "wrote " << output << " (" << mesh.num_nodes() << " nodes, "
                  << mesh.num_elements() << " elements)\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
