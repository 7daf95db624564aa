// Count nontrivial critical points of G over a coarse grid of F0 and print the CSV.
#include <cstdlib>
#include <iostream>

#include "cli/scan.hpp"

using namespace gtorus;

int main(int argc, char **argv)
{
    cli::ScanJob job;
    job.n = argc > 1 ? std::atoi(argv[1]) : 1;
    job.nx = 11;
    job.ny = 8;
    job.im_min = 0.4;
    job.im_max = 1.8;
    job.rs_grid = 50;
    job.tasks.wedge = false;
    job.threads = 2;
    const auto rows = cli::run_scan(job);
    cli::write_scan_csv(std::cout, rows);
}
